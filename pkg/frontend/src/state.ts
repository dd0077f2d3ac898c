/**
 * Explorer state: response cache, pinned comparison traces, and the
 * request bookkeeping that makes slider dragging safe (only the newest
 * request per axis may render; stale responses are discarded, so a
 * displayed trace always corresponds to one completed response).
 */

import type { RateEntry, SweepSpec, SystemParams } from "./types.js";

/**
 * Canonical cache key.  JSON with lexicographically sorted keys and
 * shortest round-trip number literals: distinct parameter sets cannot
 * collide because serialization is injective on (params, spec).
 */
export function canonicalKey(params: SystemParams, spec: SweepSpec): string {
  const sorted = (obj: Record<string, unknown>) =>
    Object.fromEntries(Object.entries(obj).sort(([a], [b]) => (a < b ? -1 : 1)));
  return JSON.stringify({ params: sorted({ ...params }), spec: sorted({ ...spec }) });
}

export interface PinnedTrace {
  key: string;
  label: string;
  entries: RateEntry[];
}

export const MAX_PINS = 5;

export class ExplorerState {
  private cache = new Map<string, RateEntry[]>();
  private pins: PinnedTrace[] = [];
  private seq = new Map<string, number>();
  private rendered = new Map<string, number>();

  cached(key: string): RateEntry[] | undefined {
    return this.cache.get(key);
  }

  store(key: string, entries: RateEntry[]): void {
    this.cache.set(key, entries);
  }

  /** Sequence number for a new request on this axis. */
  nextRequest(axis: string): number {
    const n = (this.seq.get(axis) ?? 0) + 1;
    this.seq.set(axis, n);
    return n;
  }

  /** True when a finished request is still the newest for its axis. */
  acceptResponse(axis: string, requestSeq: number): boolean {
    if (requestSeq !== this.seq.get(axis)) return false; // stale; discard
    const last = this.rendered.get(axis) ?? 0;
    if (requestSeq <= last) return false;
    this.rendered.set(axis, requestSeq);
    return true;
  }

  /** Pin a trace for comparison; at the limit the oldest pin is evicted. */
  pin(trace: PinnedTrace): { evicted: PinnedTrace | null } {
    let evicted: PinnedTrace | null = null;
    if (this.pins.length >= MAX_PINS) {
      evicted = this.pins.shift() ?? null;
    }
    this.pins.push(trace);
    return { evicted };
  }

  pinned(): readonly PinnedTrace[] {
    return this.pins;
  }

  clearPins(): void {
    this.pins = [];
  }
}

/** Trailing-edge debounce; the last call wins. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
  timers: { set: typeof setTimeout; clear: typeof clearTimeout } = {
    set: setTimeout,
    clear: clearTimeout,
  },
): (...args: A) => void {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (handle !== undefined) timers.clear(handle);
    handle = timers.set(() => fn(...args), ms);
  };
}
