/** Client-side validation of the malfunction form, mirroring the service
 * ranges: magnitude 90-120%, completion 0-30 min, procedure start 0-60 min.
 */

export interface MalfunctionForm {
  kind: "step" | "ramp";
  magnitudePct: number;     // percent, 90..120
  completeMinutes: number;  // 0..30 (ramp only)
  startMinutes: number;     // 0..60
}

export interface ValidationResult {
  ok: boolean;
  errors: Partial<Record<keyof MalfunctionForm, string>>;
}

export const MAGNITUDE_PCT_RANGE: [number, number] = [90, 120];
export const COMPLETE_MINUTES_RANGE: [number, number] = [0, 30];
export const START_MINUTES_RANGE: [number, number] = [0, 60];

export function validateMalfunctionForm(form: MalfunctionForm): ValidationResult {
  const errors: ValidationResult["errors"] = {};
  if (form.kind !== "step" && form.kind !== "ramp") {
    errors.kind = "kind must be step or ramp";
  }
  const [mLo, mHi] = MAGNITUDE_PCT_RANGE;
  if (!Number.isFinite(form.magnitudePct) || form.magnitudePct < mLo || form.magnitudePct > mHi) {
    errors.magnitudePct = `magnitude must be between ${mLo}% and ${mHi}%`;
  }
  const [cLo, cHi] = COMPLETE_MINUTES_RANGE;
  if (!Number.isFinite(form.completeMinutes) || form.completeMinutes < cLo || form.completeMinutes > cHi) {
    errors.completeMinutes = `completion must be between ${cLo} and ${cHi} minutes`;
  }
  if (form.kind === "step" && form.completeMinutes !== 0) {
    errors.completeMinutes = "a step surge completes instantly; set 0 minutes";
  }
  const [sLo, sHi] = START_MINUTES_RANGE;
  if (!Number.isFinite(form.startMinutes) || form.startMinutes < sLo || form.startMinutes > sHi) {
    errors.startMinutes = `procedure start must be between ${sLo} and ${sHi} minutes`;
  }
  return { ok: Object.keys(errors).length === 0, errors };
}

/** Convert a valid form to the service payload (percent -> multiplier, min -> s). */
export function formToScenario(form: MalfunctionForm) {
  return {
    kind: form.kind,
    magnitude: form.magnitudePct / 100,
    t_complete: form.kind === "ramp" ? form.completeMinutes * 60 : 0,
    t_procedure_start: form.startMinutes * 60,
  };
}
