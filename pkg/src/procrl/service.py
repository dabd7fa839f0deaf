"""Session-oriented service: live simulation, malfunction injection,
plan/explanation retrieval, and procedure adoption over HTTP + WebSocket.

Each session owns one plant instance advancing in exact one-minute chunks;
a speed multiplier maps simulated minutes to wall time (x60 by default, so
a 30-minute episode plays in 30 s; 0 pauses the clock).  Commands take
effect on minute boundaries, which makes the event log of a session
replayable bit-for-bit.  Planning and policy projections run on a snapshot
and never perturb the live trajectory.

Endpoints (JSON):
    POST   /sessions                     {"speed": 60}         -> {"session_id"}
    GET    /sessions/{id}                                      -> status
    POST   /sessions/{id}/clock          {"speed"|"advance"}   -> status
    POST   /sessions/{id}/malfunction    scenario fields       -> ack
    POST   /sessions/{id}/plan           {}                    -> plan bundle
    POST   /sessions/{id}/procedure      {"schedule": [sv...]} -> ack
    GET    /sessions/{id}/log                                  -> {"events"}
    GET    /sessions/{id}/trace                                -> {"frames"}
    DELETE /sessions/{id}                                      -> ack
    WS     /sessions/{id}/stream         frames {"t", "sensors", "reward_cum"}
"""

import asyncio
import json
import uuid
from dataclasses import dataclass

from aiohttp import web

from . import plant
from .env import EpisodeSpec, RewardConfig, reward
from .influence import diagnose, explain, load_default_rules, load_rules, plan
from .malfunction import MalfunctionScenario, ScenarioError, feed_pressure_at
from .pid import SetpointRangeError, level_controller, pressure_controller, set_sv
from .ppo import PpoAgent

DEFAULT_SPEED = 60.0

# Deviation deadbands for diagnosis from live sensors.
PRESSURE_BAND = 0.002   # MPa
LEVEL_BAND = 0.01       # m
FLOW_REL_BAND = 0.02    # fraction of the steady value


@dataclass
class ServiceConfig:
    speed: float = DEFAULT_SPEED
    checkpoint_path: str = None
    rules_path: str = None
    plant_cfg: plant.PlantConfig = None
    reward_cfg: RewardConfig = None
    spec: EpisodeSpec = None


class Session:
    """One operator session: plant, controllers, scenario, event log."""

    def __init__(self, session_id: str, cfg: ServiceConfig, speed: float):
        self.id = session_id
        self.plant_cfg = cfg.plant_cfg or plant.PlantConfig()
        self.reward_cfg = cfg.reward_cfg or RewardConfig()
        self.spec = cfg.spec or EpisodeSpec()
        op = plant.steady_state(self.plant_cfg, self.reward_cfg.sigma)
        self.state = op.state
        self.pc130 = pressure_controller(bias=op.pc130_bias,
                                         sv=self.reward_cfg.sigma,
                                         sv_bounds=(self.spec.sv_low,
                                                    self.spec.sv_high))
        self.lc130 = level_controller(bias=op.lc130_bias, sv=op.state.level)
        self.operating_point = op
        self.speed = float(speed)
        self.scenario = None
        self.scenario_onset_t = 0.0
        self.schedule = []
        self.minutes_done = 0
        self.reward_cum = 0.0
        self.events = []
        self.frames = []
        self.subscribers = set()
        self.closed = False
        self._wake = asyncio.Event()
        self._task = None

    # ------------------------------------------------------------- lifecycle

    def start(self):
        self._task = asyncio.get_running_loop().create_task(self._run())

    async def _run(self):
        while not self.closed:
            if self.speed <= 0:
                self._wake.clear()
                await self._wake.wait()
                continue
            await asyncio.sleep(60.0 / self.speed)
            if not self.closed and self.speed > 0:
                self.advance_minutes(1)

    async def close(self):
        self.closed = True
        self._wake.set()
        if self._task is not None:
            self._task.cancel()
            try:
                await self._task
            except asyncio.CancelledError:
                pass
        for q in list(self.subscribers):
            q.put_nowait(None)

    # ------------------------------------------------------------- commands

    def set_speed(self, speed: float):
        self.speed = float(speed)
        if self.speed > 0:
            self._wake.set()

    def inject(self, scenario: MalfunctionScenario):
        # A second injection replaces the first, from the current time on.
        self.scenario = scenario
        self.scenario_onset_t = self.state.t
        self.reward_cum = 0.0
        self.events.append({"minute": self.minutes_done, "type": "malfunction",
                            "scenario": scenario.to_dict()})

    def adopt(self, schedule):
        for sv in schedule:
            if not self.spec.sv_low <= sv <= self.spec.sv_high:
                raise SetpointRangeError(
                    f"scheduled setpoint {sv} outside "
                    f"[{self.spec.sv_low}, {self.spec.sv_high}]")
        self.schedule = list(schedule)
        self.events.append({"minute": self.minutes_done, "type": "procedure",
                            "schedule": list(schedule)})

    # ------------------------------------------------------------- dynamics

    def _feed_at(self, t: float) -> float:
        nominal = self.plant_cfg.nominal_feed_pressure
        if self.scenario is None:
            return nominal
        return feed_pressure_at(self.scenario, nominal,
                                t - self.scenario_onset_t)

    def advance_minutes(self, n: int):
        for _ in range(n):
            if self.schedule:
                self.pc130 = set_sv(self.pc130, self.schedule.pop(0))
            steps = int(round(60.0 / self.plant_cfg.integration_dt))
            for _ in range(steps):
                feed = self._feed_at(self.state.t)
                result = plant.step(self.state, self.pc130, self.lc130,
                                    feed, self.plant_cfg)
                self.state = result.state
                self.pc130 = result.pc130
                self.lc130 = result.lc130
            self.minutes_done += 1
            self.reward_cum += reward(self.state.pressure, self.reward_cfg)
            frame = self.make_frame()
            self.frames.append(frame)
            for q in self.subscribers:
                q.put_nowait(frame)

    def make_frame(self) -> dict:
        sensors = plant.observe(self.state, self.pc130, self.plant_cfg)
        return {"t": self.state.t, "sensors": sensors.as_dict(),
                "reward_cum": self.reward_cum}

    # ------------------------------------------------------------- planning

    def current_deviations(self) -> list:
        steady = self.operating_point.state
        sensors = plant.observe(self.state, self.pc130, self.plant_cfg)
        deviations = []
        d_flow = sensors.fi101_flow - steady.fi101_flow
        if abs(d_flow) > FLOW_REL_BAND * abs(steady.fi101_flow):
            deviations.append(("fi101_flow", "+" if d_flow > 0 else "-"))
        d_p = sensors.vaporizer_pressure - self.reward_cfg.sigma
        if abs(d_p) > PRESSURE_BAND:
            deviations.append(("vaporizer_pressure", "+" if d_p > 0 else "-"))
        d_l = sensors.vaporizer_level - steady.level
        if abs(d_l) > LEVEL_BAND:
            deviations.append(("vaporizer_level", "+" if d_l > 0 else "-"))
        return deviations

    def snapshot_rollout(self, policy, minutes: int = 30):
        """Greedy what-if projection from the current state; the live
        session is untouched."""
        state, pc130, lc130 = self.state, self.pc130, self.lc130
        setpoints, pressures = [], []
        for _ in range(minutes):
            obs = plant.observe(state, pc130, self.plant_cfg)
            sv = policy(obs)
            if sv is not None:
                pc130 = set_sv(pc130, float(sv))
            steps = int(round(60.0 / self.plant_cfg.integration_dt))
            for _ in range(steps):
                feed = self._feed_at(state.t)
                result = plant.step(state, pc130, lc130, feed, self.plant_cfg)
                state, pc130, lc130 = result.state, result.pc130, result.lc130
            setpoints.append(pc130.sv)
            pressures.append([state.t, state.pressure])
        return setpoints, pressures


def replay_session(events, minutes: int, cfg: ServiceConfig = None) -> list:
    """Re-run a session's event log offline; returns the frame list.

    Bit-for-bit identical to the live frames because commands only ever
    take effect on minute boundaries.
    """
    cfg = cfg or ServiceConfig()
    session = Session("replay", cfg, speed=0.0)
    by_minute = {}
    for ev in events:
        by_minute.setdefault(int(ev["minute"]), []).append(ev)
    for minute in range(minutes):
        for ev in by_minute.get(minute, ()):
            if ev["type"] == "malfunction":
                session.inject(MalfunctionScenario.from_dict(ev["scenario"]))
            elif ev["type"] == "procedure":
                session.adopt(ev["schedule"])
            else:
                raise ValueError(f"unknown event type {ev['type']!r}")
        session.advance_minutes(1)
    return session.frames


# ------------------------------------------------------------------ web app

def _json_error(status: int, message: str):
    return web.json_response({"error": message}, status=status)


@web.middleware
async def _cors_middleware(request, handler):
    # The operator console is served from its own origin (vite dev server
    # or static host); allow it to reach the API and preflights.
    headers = {
        "Access-Control-Allow-Origin": "*",
        "Access-Control-Allow-Methods": "GET, POST, DELETE, OPTIONS",
        "Access-Control-Allow-Headers": "Content-Type",
    }
    if request.method == "OPTIONS":
        return web.Response(status=204, headers=headers)
    try:
        response = await handler(request)
    except web.HTTPException as exc:
        exc.headers.extend(headers)
        raise
    response.headers.extend(headers)
    return response


def create_app(cfg: ServiceConfig = None) -> web.Application:
    cfg = cfg or ServiceConfig()
    app = web.Application(middlewares=[_cors_middleware])
    sessions = {}
    graph = (load_rules(cfg.rules_path) if cfg.rules_path
             else load_default_rules())
    agent = PpoAgent.load(cfg.checkpoint_path) if cfg.checkpoint_path else None

    def get_session(request) -> Session:
        session = sessions.get(request.match_info["id"])
        if session is None:
            raise web.HTTPNotFound(
                text=json.dumps({"error": "unknown session"}),
                content_type="application/json")
        return session

    async def create_session(request):
        try:
            body = await request.json() if request.can_read_body else {}
        except json.JSONDecodeError:
            return _json_error(400, "body must be JSON")
        speed = body.get("speed", cfg.speed)
        if not isinstance(speed, (int, float)) or speed < 0:
            return _json_error(400, "speed must be a number >= 0")
        session_id = uuid.uuid4().hex
        session = Session(session_id, cfg, speed=speed)
        sessions[session_id] = session
        session.start()
        return web.json_response({"session_id": session_id,
                                  "speed": session.speed,
                                  "frame": session.make_frame()}, status=201)

    async def session_status(request):
        s = get_session(request)
        return web.json_response({
            "session_id": s.id, "t": s.state.t, "minutes": s.minutes_done,
            "speed": s.speed, "reward_cum": s.reward_cum,
            "scenario": s.scenario.to_dict() if s.scenario else None,
            "procedure_active": bool(s.schedule),
            "frame": s.make_frame(),
        })

    async def clock(request):
        s = get_session(request)
        body = await request.json()
        if "speed" in body:
            if not isinstance(body["speed"], (int, float)) or body["speed"] < 0:
                return _json_error(400, "speed must be a number >= 0")
            s.set_speed(body["speed"])
        if "advance" in body:
            n = body["advance"]
            if not isinstance(n, int) or n < 0 or n > 600:
                return _json_error(400, "advance must be an integer in [0, 600]")
            s.advance_minutes(n)
        return web.json_response({"speed": s.speed, "t": s.state.t,
                                  "minutes": s.minutes_done})

    async def inject_malfunction(request):
        s = get_session(request)
        body = await request.json()
        try:
            scenario = MalfunctionScenario(
                kind=body.get("kind", "step"),
                magnitude=float(body.get("magnitude", 1.0)),
                t_complete=float(body.get("t_complete", 0.0)),
                t_procedure_start=float(body.get("t_procedure_start", 0.0)),
            )
        except (ScenarioError, TypeError, ValueError) as exc:
            return _json_error(400, f"invalid scenario: {exc}")
        s.inject(scenario)
        return web.json_response({"status": "injected",
                                  "onset_t": s.scenario_onset_t,
                                  "scenario": scenario.to_dict()})

    async def request_plan(request):
        s = get_session(request)
        deviations = s.current_deviations()
        diagnosis = [c.to_dict() for c in diagnose(graph, deviations)]
        plan_dict, explanation = None, None
        pressure_dev = dict(deviations).get("vaporizer_pressure")
        if pressure_dev is not None:
            restore = "-" if pressure_dev == "+" else "+"
            try:
                p = plan(graph, ("vaporizer_pressure", restore))
                plan_dict = p.to_dict()
                explanation = explain(p, graph).to_dict()
            except Exception as exc:  # no counteracting path in this KB
                return _json_error(409, f"planning failed: {exc}")

        schedule = predicted = None
        if agent is not None and plan_dict is not None:
            def greedy(sensors):
                import numpy as np
                return agent.greedy_action(
                    np.array(sensors.as_tuple(), dtype=float))
            schedule, predicted = s.snapshot_rollout(greedy)
        sigma = s.reward_cfg.sigma
        _, baseline_projection = s.snapshot_rollout(lambda sensors: sigma)
        return web.json_response({
            "deviations": [list(d) for d in deviations],
            "diagnosis": diagnosis,
            "plan": plan_dict,
            "explanation": explanation,
            "schedule": schedule,
            "predicted_pressure": predicted,
            "baseline_projection": baseline_projection,
            "sigma": sigma,
        })

    async def apply_procedure(request):
        s = get_session(request)
        body = await request.json()
        schedule = body.get("schedule", [])
        if not isinstance(schedule, list):
            return _json_error(400, "schedule must be a list of setpoints")
        try:
            s.adopt([float(v) for v in schedule])
        except (SetpointRangeError, TypeError, ValueError) as exc:
            return _json_error(400, str(exc))
        return web.json_response({"status": "adopted", "length": len(schedule)})

    async def session_log(request):
        s = get_session(request)
        return web.json_response({"events": s.events,
                                  "minutes": s.minutes_done})

    async def session_trace(request):
        s = get_session(request)
        return web.json_response({"frames": s.frames})

    async def delete_session(request):
        s = get_session(request)
        await s.close()
        del sessions[s.id]
        return web.json_response({"status": "closed"})

    async def stream(request):
        s = get_session(request)
        ws = web.WebSocketResponse()
        await ws.prepare(request)
        queue = asyncio.Queue()
        s.subscribers.add(queue)

        async def pump():
            # Forward frames until the session ends (None sentinel).
            try:
                while True:
                    frame = await queue.get()
                    if frame is None:
                        await ws.close()
                        return
                    await ws.send_json(frame)
            except ConnectionResetError:
                pass

        pump_task = asyncio.get_running_loop().create_task(pump())
        try:
            # Read side only exists to notice the client closing the socket.
            async for _ in ws:
                pass
        finally:
            s.subscribers.discard(queue)
            pump_task.cancel()
            try:
                await pump_task
            except asyncio.CancelledError:
                pass
            await ws.close()
        return ws

    async def on_shutdown(app):
        for session in list(sessions.values()):
            await session.close()
        sessions.clear()

    app.router.add_post("/sessions", create_session)
    app.router.add_get("/sessions/{id}", session_status)
    app.router.add_post("/sessions/{id}/clock", clock)
    app.router.add_post("/sessions/{id}/malfunction", inject_malfunction)
    app.router.add_post("/sessions/{id}/plan", request_plan)
    app.router.add_post("/sessions/{id}/procedure", apply_procedure)
    app.router.add_get("/sessions/{id}/log", session_log)
    app.router.add_get("/sessions/{id}/trace", session_trace)
    app.router.add_delete("/sessions/{id}", delete_session)
    app.router.add_get("/sessions/{id}/stream", stream)
    app.on_shutdown.append(on_shutdown)
    return app


def run_server(host: str = "127.0.0.1", port: int = 8080,
               cfg: ServiceConfig = None) -> None:
    web.run_app(create_app(cfg), host=host, port=port)
