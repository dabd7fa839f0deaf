/** Payload shapes of the session service; field names are the wire contract. */

export interface Sensors {
  fi101_flow: number;
  vaporizer_pressure: number;
  vaporizer_level: number;
  x_pcv: number;
  x_lcv: number;
  pc130_sv: number;
  outlet_flow: number;
}

export const SENSOR_FIELDS: (keyof Sensors)[] = [
  "fi101_flow",
  "vaporizer_pressure",
  "vaporizer_level",
  "x_pcv",
  "x_lcv",
  "pc130_sv",
  "outlet_flow",
];

/** One stream message per simulated minute. */
export interface Frame {
  t: number;
  sensors: Sensors;
  reward_cum: number;
}

export interface SessionCreated {
  session_id: string;
  speed: number;
  frame: Frame;
}

export interface ScenarioParams {
  kind: "step" | "ramp";
  magnitude: number;
  t_complete: number;
  t_procedure_start: number;
}

export interface SessionStatus {
  session_id: string;
  t: number;
  minutes: number;
  speed: number;
  reward_cum: number;
  scenario: (ScenarioParams & { onset: number }) | null;
  procedure_active: boolean;
  frame: Frame;
}

export interface RuleRef {
  antecedent: string;
  antecedent_dir: "inc" | "dec";
  consequent: string;
  consequent_dir: "inc" | "dec";
  kind: string;
  source: string;
}

export interface PlanStep {
  target: string;
  direction: "inc" | "dec";
  chain: RuleRef[];
}

export interface PlanDict {
  goal_variable: string;
  goal_direction: "inc" | "dec";
  steps: PlanStep[];
}

export interface Diagnosis {
  variable: string;
  direction: "inc" | "dec";
  explained: string[];
  path_length: number;
}

/** Response of POST /sessions/{id}/plan. */
export interface PlanBundle {
  deviations: [string, "+" | "-"][];
  diagnosis: Diagnosis[];
  plan: PlanDict | null;
  explanation: { lines: string[] } | null;
  schedule: number[] | null;
  predicted_pressure: [number, number][] | null;
  baseline_projection: [number, number][];
  sigma: number;
}

export interface Ack {
  status: string;
  [key: string]: unknown;
}
