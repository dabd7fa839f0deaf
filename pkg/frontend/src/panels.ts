/** DOM builders for the malfunction form, plan panel and status badges. */

import { PlanBundle } from "./types";
import {
  COMPLETE_MINUTES_RANGE,
  MAGNITUDE_PCT_RANGE,
  MalfunctionForm,
  START_MINUTES_RANGE,
  validateMalfunctionForm,
} from "./validation";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

export function readForm(root: HTMLElement): MalfunctionForm {
  const get = (name: string) =>
    (root.querySelector(`[name=${name}]`) as HTMLInputElement | HTMLSelectElement).value;
  return {
    kind: get("kind") as MalfunctionForm["kind"],
    magnitudePct: Number(get("magnitude")),
    completeMinutes: Number(get("complete")),
    startMinutes: Number(get("start")),
  };
}

export function buildMalfunctionForm(onSubmit: (form: MalfunctionForm) => void): HTMLElement {
  const errorBox = el("div", { class: "form-errors" });
  const root = el(
    "form",
    { class: "panel malfunction-form" },
    el("h3", {}, "Inject malfunction"),
    el(
      "label",
      {},
      "profile ",
      el("select", { name: "kind" }, el("option", { value: "step" }, "step"), el("option", { value: "ramp" }, "ramp")),
    ),
    el(
      "label",
      {},
      `magnitude % (${MAGNITUDE_PCT_RANGE[0]}–${MAGNITUDE_PCT_RANGE[1]}) `,
      el("input", { name: "magnitude", type: "number", step: "1", value: "120" }),
    ),
    el(
      "label",
      {},
      `complete in min (${COMPLETE_MINUTES_RANGE[0]}–${COMPLETE_MINUTES_RANGE[1]}) `,
      el("input", { name: "complete", type: "number", step: "1", value: "0" }),
    ),
    el(
      "label",
      {},
      `procedure start min (${START_MINUTES_RANGE[0]}–${START_MINUTES_RANGE[1]}) `,
      el("input", { name: "start", type: "number", step: "1", value: "0" }),
    ),
    errorBox,
    el("button", { type: "submit" }, "inject"),
  );
  root.addEventListener("submit", (event) => {
    event.preventDefault();
    const form = readForm(root);
    const result = validateMalfunctionForm(form);
    errorBox.textContent = Object.values(result.errors).join("; ");
    if (result.ok) onSubmit(form);
  });
  return root;
}

export function buildPlanPanel(
  bundle: PlanBundle,
  onAdopt: (schedule: number[]) => void,
  onReject: () => void,
): HTMLElement {
  const root = el("div", { class: "panel plan-panel" }, el("h3", {}, "Proposed procedure"));

  if (bundle.deviations.length === 0) {
    root.append(el("p", {}, "No deviations observed; nothing to plan."));
    return root;
  }
  root.append(
    el(
      "p",
      {},
      "deviations: " + bundle.deviations.map(([v, s]) => `${v} ${s}`).join(", "),
    ),
  );
  if (bundle.diagnosis.length > 0) {
    const top = bundle.diagnosis[0];
    root.append(el("p", {}, `likely root cause: ${top.variable} ${top.direction}`));
  }
  if (bundle.plan) {
    for (const step of bundle.plan.steps) {
      const chain = el("ul", { class: "rule-chain" });
      for (const rule of step.chain) {
        chain.append(
          el(
            "li",
            {},
            `${rule.antecedent} ${rule.antecedent_dir} → ${rule.consequent} ${rule.consequent_dir}`,
            el("span", { class: "rule-source" }, ` [${rule.source}]`),
          ),
        );
      }
      root.append(el("p", {}, `move ${step.target} ${step.direction}`), chain);
    }
  }
  if (bundle.explanation) {
    const box = el("pre", { class: "explanation" });
    box.textContent = bundle.explanation.lines.join("\n");
    root.append(box);
  }

  const actions = el("div", { class: "plan-actions" });
  if (bundle.schedule && bundle.schedule.length > 0) {
    const schedule = bundle.schedule;
    const adopt = el("button", { type: "button" }, `adopt ${schedule.length}-step schedule`);
    adopt.addEventListener("click", () => onAdopt(schedule));
    actions.append(adopt);
  } else {
    actions.append(el("span", { class: "muted" }, "no trained schedule available"));
  }
  const reject = el("button", { type: "button", class: "secondary" }, "reject");
  reject.addEventListener("click", onReject);
  actions.append(reject);
  root.append(actions);
  return root;
}

export function statusBadge(text: string, kind: "ok" | "warn" | "info"): HTMLElement {
  return el("span", { class: `badge badge-${kind}` }, text);
}
