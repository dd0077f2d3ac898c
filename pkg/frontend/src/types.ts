/** Wire types matching the rates service. */

export interface SystemParams {
  lambda_p: number;
  lambda_dc: number;
  frame_width: number;
  bins_per_frame: number;
  sigma_d: number;
  downtime_bins: number;
  downtime_seconds: number | null;
}

export type SweepAxis = "n" | "p" | "d" | "sigma_ratio" | "dc_ratio";

export interface SweepSpec {
  axis: SweepAxis;
  from: number;
  to: number;
  points: number;
  log: boolean;
}

/** One element of the POST /v1/rates response array. */
export interface RateEntry {
  axis: string;
  axis_value: number;
  error?: string;
  params?: SystemParams;
  p_occupy?: number;
  k_raw?: number;
  rod?: number;
  beta_r?: number;
  k_reconciled?: number;
  c_dr?: number;
  k_uniform?: number;
  k_secret?: number;
  valid_prob_iid?: number;
  valid_prob_chain?: number;
  r_raw?: number;
  r_adjusted?: number;
  r_secret?: number;
  r_secret_time?: number;
  clamped?: boolean;
}

/** Metrics the explorer can plot; values are RateEntry field names. */
export const METRICS = [
  { field: "r_raw", label: "raw rate (bits/frame)" },
  { field: "c_dr", label: "compression ratio" },
  { field: "r_adjusted", label: "corrected rate (bits/frame)" },
  { field: "rod", label: "disagreement rate" },
  { field: "k_reconciled", label: "shared information (bits/frame)" },
  { field: "r_secret", label: "secret rate (bits/frame)" },
] as const;

export type MetricField = (typeof METRICS)[number]["field"];
