/** Runtime validators for every service payload the console consumes.
 *
 * The app funnels all API responses through these, and the contract tests
 * run the same validators against recorded (or live) service responses, so
 * a drifting backend shape fails loudly in both places.
 */

import {
  Frame,
  PlanBundle,
  SENSOR_FIELDS,
  Sensors,
  SessionCreated,
  SessionStatus,
} from "./types";

export class ContractError extends Error {}

function fail(path: string, expected: string, got: unknown): never {
  throw new ContractError(`${path}: expected ${expected}, got ${JSON.stringify(got)}`);
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

function num(x: unknown, path: string): number {
  if (typeof x !== "number" || !Number.isFinite(x)) fail(path, "finite number", x);
  return x;
}

function str(x: unknown, path: string): string {
  if (typeof x !== "string") fail(path, "string", x);
  return x;
}

export function assertSensors(x: unknown, path = "sensors"): Sensors {
  if (!isRecord(x)) fail(path, "object", x);
  for (const field of SENSOR_FIELDS) num(x[field], `${path}.${field}`);
  return x as unknown as Sensors;
}

export function assertFrame(x: unknown, path = "frame"): Frame {
  if (!isRecord(x)) fail(path, "object", x);
  num(x.t, `${path}.t`);
  num(x.reward_cum, `${path}.reward_cum`);
  assertSensors(x.sensors, `${path}.sensors`);
  return x as unknown as Frame;
}

export function assertSessionCreated(x: unknown): SessionCreated {
  if (!isRecord(x)) fail("session", "object", x);
  str(x.session_id, "session.session_id");
  num(x.speed, "session.speed");
  assertFrame(x.frame, "session.frame");
  return x as unknown as SessionCreated;
}

export function assertStatus(x: unknown): SessionStatus {
  if (!isRecord(x)) fail("status", "object", x);
  str(x.session_id, "status.session_id");
  num(x.t, "status.t");
  num(x.minutes, "status.minutes");
  num(x.speed, "status.speed");
  num(x.reward_cum, "status.reward_cum");
  if (typeof x.procedure_active !== "boolean")
    fail("status.procedure_active", "boolean", x.procedure_active);
  assertFrame(x.frame, "status.frame");
  return x as unknown as SessionStatus;
}

function assertSeries(x: unknown, path: string): [number, number][] {
  if (!Array.isArray(x)) fail(path, "array", x);
  for (const [i, pair] of x.entries()) {
    if (!Array.isArray(pair) || pair.length !== 2) fail(`${path}[${i}]`, "[t, value]", pair);
    num(pair[0], `${path}[${i}][0]`);
    num(pair[1], `${path}[${i}][1]`);
  }
  return x as [number, number][];
}

export function assertPlanBundle(x: unknown): PlanBundle {
  if (!isRecord(x)) fail("plan bundle", "object", x);
  if (!Array.isArray(x.deviations)) fail("deviations", "array", x.deviations);
  for (const [i, d] of x.deviations.entries()) {
    if (!Array.isArray(d) || d.length !== 2) fail(`deviations[${i}]`, "[var, sign]", d);
    str(d[0], `deviations[${i}][0]`);
    if (d[1] !== "+" && d[1] !== "-") fail(`deviations[${i}][1]`, "'+' or '-'", d[1]);
  }
  if (!Array.isArray(x.diagnosis)) fail("diagnosis", "array", x.diagnosis);
  for (const [i, c] of x.diagnosis.entries()) {
    if (!isRecord(c)) fail(`diagnosis[${i}]`, "object", c);
    str(c.variable, `diagnosis[${i}].variable`);
    if (c.direction !== "inc" && c.direction !== "dec")
      fail(`diagnosis[${i}].direction`, "'inc' or 'dec'", c.direction);
  }
  if (x.plan !== null) {
    if (!isRecord(x.plan)) fail("plan", "object or null", x.plan);
    str(x.plan.goal_variable, "plan.goal_variable");
    if (!Array.isArray(x.plan.steps)) fail("plan.steps", "array", x.plan.steps);
    for (const [i, s] of x.plan.steps.entries()) {
      if (!isRecord(s)) fail(`plan.steps[${i}]`, "object", s);
      str(s.target, `plan.steps[${i}].target`);
      if (s.direction !== "inc" && s.direction !== "dec")
        fail(`plan.steps[${i}].direction`, "'inc' or 'dec'", s.direction);
      if (!Array.isArray(s.chain)) fail(`plan.steps[${i}].chain`, "array", s.chain);
      for (const [j, r] of s.chain.entries()) {
        if (!isRecord(r)) fail(`plan.steps[${i}].chain[${j}]`, "object", r);
        str(r.source, `plan.steps[${i}].chain[${j}].source`);
      }
    }
    if (x.explanation === null || !isRecord(x.explanation)
        || !Array.isArray((x.explanation as Record<string, unknown>).lines))
      fail("explanation", "object with lines[]", x.explanation);
  }
  if (x.schedule !== null) {
    if (!Array.isArray(x.schedule)) fail("schedule", "array or null", x.schedule);
    for (const [i, sv] of x.schedule.entries()) num(sv, `schedule[${i}]`);
  }
  if (x.predicted_pressure !== null)
    assertSeries(x.predicted_pressure, "predicted_pressure");
  assertSeries(x.baseline_projection, "baseline_projection");
  num(x.sigma, "sigma");
  return x as unknown as PlanBundle;
}
