/** Console state: everything on screen derives from stream frames and API
 * responses; the client computes no plant physics of its own.
 */

import { Frame, PlanBundle } from "./types";

export const TREND_MINUTES = 60;

/** Bounded trend buffer holding the last TREND_MINUTES one-minute samples. */
export class TrendBuffer {
  private points: [number, number][] = [];

  constructor(private capacity: number = TREND_MINUTES) {}

  push(t: number, value: number): void {
    this.points.push([t, value]);
    if (this.points.length > this.capacity) {
      this.points.splice(0, this.points.length - this.capacity);
    }
  }

  get data(): readonly [number, number][] {
    return this.points;
  }

  get length(): number {
    return this.points.length;
  }

  clear(): void {
    this.points = [];
  }
}

export type AdoptionStatus = "none" | "proposed" | "active" | "rejected";

export interface ConsoleState {
  sessionId: string | null;
  lastFrame: Frame | null;
  trends: Record<string, TrendBuffer>;
  plan: PlanBundle | null;
  adoption: AdoptionStatus;
  baselineOverlay: boolean;
  sigma: number;
}

export function initialState(sigma = 0.784): ConsoleState {
  return {
    sessionId: null,
    lastFrame: null,
    trends: {
      vaporizer_pressure: new TrendBuffer(),
      fi101_flow: new TrendBuffer(),
      pc130_sv: new TrendBuffer(),
      reward_cum: new TrendBuffer(),
    },
    plan: null,
    adoption: "none",
    baselineOverlay: false,
    sigma,
  };
}

export function applyFrame(state: ConsoleState, frame: Frame): void {
  state.lastFrame = frame;
  state.trends.vaporizer_pressure.push(frame.t, frame.sensors.vaporizer_pressure);
  state.trends.fi101_flow.push(frame.t, frame.sensors.fi101_flow);
  state.trends.pc130_sv.push(frame.t, frame.sensors.pc130_sv);
  state.trends.reward_cum.push(frame.t, frame.reward_cum);
}

export function applyPlan(state: ConsoleState, bundle: PlanBundle): void {
  state.plan = bundle;
  state.sigma = bundle.sigma;
  state.adoption = bundle.schedule && bundle.schedule.length > 0 ? "proposed" : state.adoption;
}

export function markAdopted(state: ConsoleState): void {
  state.adoption = "active";
}

export function markRejected(state: ConsoleState): void {
  state.adoption = "rejected";
  if (state.plan) state.plan = { ...state.plan, schedule: null };
}

/** Rebuild trend buffers from a full trace (page reload / resubscribe). */
export function rebuildFromTrace(state: ConsoleState, frames: Frame[]): void {
  for (const buffer of Object.values(state.trends)) buffer.clear();
  for (const frame of frames) applyFrame(state, frame);
}
