/** Operator console wiring: one session, one WebSocket, live trends. */

import { ApiClient, ApiError } from "./api";
import { drawTrend, Series } from "./chart";
import { buildMalfunctionForm, buildPlanPanel, el, statusBadge } from "./panels";
import {
  applyFrame,
  applyPlan,
  initialState,
  markAdopted,
  markRejected,
  rebuildFromTrace,
} from "./state";
import { formToScenario } from "./validation";

const API_URL = import.meta.env.VITE_API_URL ?? "http://127.0.0.1:8080";
const SPEED = Number(import.meta.env.VITE_SPEED ?? "60");

const api = new ApiClient(API_URL);
const state = initialState();

const app = document.getElementById("app")!;
const header = el("div", { class: "header" }, el("h2", {}, "Feed-section operator console"));
const badges = el("div", { class: "badges" });
const pressureCanvas = el("canvas", { width: "860", height: "260" });
const auxCanvas = el("canvas", { width: "860", height: "180" });
const sidePanel = el("div", { class: "side" });
const overlayToggle = el("label", { class: "overlay-toggle" },
  el("input", { type: "checkbox" }), " baseline overlay");
const readout = el("div", { class: "readout" });

app.append(
  header,
  badges,
  el("div", { class: "layout" },
    el("div", { class: "charts" },
      el("h3", {}, "Vaporizer pressure"),
      pressureCanvas,
      overlayToggle,
      el("h3", {}, "Setpoint and feed flow"),
      auxCanvas,
      readout),
    sidePanel),
);

const overlayInput = overlayToggle.querySelector("input")!;
overlayInput.addEventListener("change", () => {
  state.baselineOverlay = overlayInput.checked;
  redraw();
});

function redraw(): void {
  const pressure: Series[] = [
    { label: "vaporizer_pressure", color: "#5fb3ff", data: state.trends.vaporizer_pressure.data },
  ];
  if (state.baselineOverlay && state.plan) {
    pressure.push({
      label: "PID baseline (projected)",
      color: "#a0a7b4",
      data: state.plan.baseline_projection,
      dashed: true,
    });
    if (state.plan.predicted_pressure) {
      pressure.push({
        label: "procedure (projected)",
        color: "#69d98f",
        data: state.plan.predicted_pressure,
        dashed: true,
      });
    }
  }
  drawTrend(pressureCanvas, pressure, { sigma: state.sigma });
  drawTrend(auxCanvas, [
    { label: "pc130_sv", color: "#e58fe0", data: state.trends.pc130_sv.data },
    { label: "fi101_flow", color: "#f2a45c", data: state.trends.fi101_flow.data },
  ]);
  if (state.lastFrame) {
    readout.textContent =
      `t=${(state.lastFrame.t / 60).toFixed(0)} min  ` +
      `pressure=${state.lastFrame.sensors.vaporizer_pressure.toFixed(5)} MPa  ` +
      `reward so far=${state.lastFrame.reward_cum.toFixed(2)}`;
  }
}

function setBadges(): void {
  badges.replaceChildren(
    statusBadge(state.sessionId ? `session ${state.sessionId.slice(0, 8)}` : "no session", "info"),
    statusBadge(
      state.adoption === "active" ? "procedure active" : `procedure: ${state.adoption}`,
      state.adoption === "active" ? "ok" : "warn",
    ),
  );
}

async function requestPlan(): Promise<void> {
  if (!state.sessionId) return;
  const bundle = await api.requestPlan(state.sessionId);
  applyPlan(state, bundle);
  sidePanel.querySelector(".plan-panel")?.remove();
  sidePanel.append(
    buildPlanPanel(
      bundle,
      async (schedule) => {
        await api.adoptProcedure(state.sessionId!, schedule);
        markAdopted(state);
        setBadges();
      },
      () => {
        markRejected(state);
        setBadges();
        redraw();
      },
    ),
  );
  setBadges();
  redraw();
}

async function boot(): Promise<void> {
  try {
    const created = await api.createSession(SPEED);
    state.sessionId = created.session_id;
    applyFrame(state, created.frame);

    // Resubscribing after a reload rebuilds the exact same view.
    rebuildFromTrace(state, await api.trace(created.session_id));
    api.openStream(created.session_id, (frame) => {
      applyFrame(state, frame);
      redraw();
    });

    sidePanel.append(
      buildMalfunctionForm(async (form) => {
        await api.injectMalfunction(state.sessionId!, formToScenario(form));
        state.adoption = "none";
        setBadges();
      }),
      el("button", { type: "button", class: "plan-button" }, "request plan"),
    );
    sidePanel.querySelector(".plan-button")!.addEventListener("click", () => {
      requestPlan().catch((err) => alert(String(err)));
    });
    setBadges();
    redraw();
  } catch (err) {
    const detail = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
    app.prepend(el("div", { class: "boot-error" },
      `cannot reach the session service at ${API_URL} (${detail}); ` +
      "start it with: procrl serve --port 8080"));
  }
}

boot();
