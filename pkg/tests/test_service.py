import asyncio
import json

import pytest
from aiohttp.test_utils import TestClient, TestServer

from procrl.ppo import PpoAgent, PpoConfig
from procrl.service import ServiceConfig, create_app, replay_session


def run(coro):
    return asyncio.run(coro)


async def make_client(cfg=None):
    client = TestClient(TestServer(create_app(cfg)))
    await client.start_server()
    return client


async def new_session(client, speed=0):
    resp = await client.post("/sessions", json={"speed": speed})
    assert resp.status == 201
    body = await resp.json()
    return body["session_id"]


async def advance(client, sid, minutes):
    resp = await client.post(f"/sessions/{sid}/clock",
                             json={"advance": minutes})
    assert resp.status == 200
    return await resp.json()


class TestSessionLifecycle:
    def test_create_starts_at_calibrated_steady_state(self):
        async def body():
            client = await make_client()
            resp = await client.post("/sessions", json={"speed": 0})
            data = await resp.json()
            assert resp.status == 201
            assert data["frame"]["sensors"]["vaporizer_pressure"] == 0.784
            await client.close()
        run(body())

    def test_two_sessions_distinct_ids(self):
        async def body():
            client = await make_client()
            a = await new_session(client)
            b = await new_session(client)
            assert a != b
            await client.close()
        run(body())

    def test_invalid_speed_rejected(self):
        async def body():
            client = await make_client()
            resp = await client.post("/sessions", json={"speed": -3})
            assert resp.status == 400
            await client.close()
        run(body())

    def test_unknown_session_404(self):
        async def body():
            client = await make_client()
            resp = await client.post("/sessions/nope/malfunction",
                                     json={"magnitude": 1.1})
            assert resp.status == 404
            await client.close()
        run(body())

    def test_delete_closes_session(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            resp = await client.delete(f"/sessions/{sid}")
            assert resp.status == 200
            resp = await client.get(f"/sessions/{sid}")
            assert resp.status == 404
            await client.close()
        run(body())


class TestMalfunctionAndStream:
    def test_surge_raises_fi101_then_pressure(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            resp = await client.post(f"/sessions/{sid}/malfunction",
                                     json={"kind": "step", "magnitude": 1.2})
            assert resp.status == 200
            await advance(client, sid, 2)
            resp = await client.get(f"/sessions/{sid}/trace")
            frames = (await resp.json())["frames"]
            assert len(frames) == 2
            assert frames[0]["sensors"]["fi101_flow"] > 0.36
            assert frames[-1]["sensors"]["vaporizer_pressure"] > 0.784
            await client.close()
        run(body())

    def test_magnitude_one_keeps_stream_flat(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            await client.post(f"/sessions/{sid}/malfunction",
                              json={"kind": "step", "magnitude": 1.0})
            await advance(client, sid, 3)
            resp = await client.get(f"/sessions/{sid}/trace")
            frames = (await resp.json())["frames"]
            assert all(f["sensors"]["vaporizer_pressure"] == 0.784 for f in frames)
            assert frames[-1]["reward_cum"] == 3.0
            await client.close()
        run(body())

    def test_second_injection_replaces_first(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            await client.post(f"/sessions/{sid}/malfunction",
                              json={"kind": "step", "magnitude": 1.2})
            resp = await client.post(f"/sessions/{sid}/malfunction",
                                     json={"kind": "step", "magnitude": 1.0})
            assert (await resp.json())["scenario"]["magnitude"] == 1.0
            status = await (await client.get(f"/sessions/{sid}")).json()
            assert status["scenario"]["magnitude"] == 1.0
            await client.close()
        run(body())

    def test_invalid_scenario_rejected(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            resp = await client.post(f"/sessions/{sid}/malfunction",
                                     json={"magnitude": 1.5})
            assert resp.status == 400
            await client.close()
        run(body())

    def test_websocket_receives_ordered_frames(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            ws = await client.ws_connect(f"/sessions/{sid}/stream")
            await advance(client, sid, 3)
            times = []
            for _ in range(3):
                msg = await asyncio.wait_for(ws.receive_json(), timeout=2)
                times.append(msg["t"])
            assert times == [60.0, 120.0, 180.0]
            await ws.close()
            await client.close()
        run(body())

    def test_paused_session_emits_nothing(self):
        async def body():
            client = await make_client()
            sid = await new_session(client, speed=0)
            ws = await client.ws_connect(f"/sessions/{sid}/stream")
            with pytest.raises(asyncio.TimeoutError):
                await asyncio.wait_for(ws.receive_json(), timeout=0.3)
            await ws.close()
            await client.close()
        run(body())

    def test_realtime_clock_cadence(self):
        # x600: one simulated minute every 0.1 s of wall time.
        async def body():
            client = await make_client()
            sid = await new_session(client, speed=600)
            ws = await client.ws_connect(f"/sessions/{sid}/stream")
            loop = asyncio.get_running_loop()
            t0 = loop.time()
            for _ in range(5):
                await asyncio.wait_for(ws.receive_json(), timeout=5)
            elapsed = loop.time() - t0
            assert 0.3 < elapsed < 3.0
            await ws.close()
            await client.close()
        run(body())


class TestPlanEndpoint:
    def test_steady_session_has_no_deviations_or_plan(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            resp = await client.post(f"/sessions/{sid}/plan", json={})
            data = await resp.json()
            assert data["deviations"] == []
            assert data["plan"] is None
            assert len(data["baseline_projection"]) == 30
            await client.close()
        run(body())

    def test_surge_session_plans_pc130_setpoint(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            await client.post(f"/sessions/{sid}/malfunction",
                              json={"kind": "step", "magnitude": 1.2})
            await advance(client, sid, 3)
            resp = await client.post(f"/sessions/{sid}/plan", json={})
            data = await resp.json()
            assert ["fi101_flow", "+"] in data["deviations"]
            assert data["diagnosis"][0]["variable"] == "fresh_ethylene_feed_pressure"
            assert data["plan"]["steps"][0]["target"] == "pc130_sv"
            assert data["plan"]["steps"][0]["direction"] == "dec"
            assert any("CN-PC130" in line for line in data["explanation"]["lines"])
            assert data["schedule"] is None  # no checkpoint configured
            await client.close()
        run(body())

    def test_plan_with_checkpoint_returns_schedule(self, tmp_path):
        agent = PpoAgent(cfg=PpoConfig(hidden_sizes=(8, 8)), seed=0)
        ck = tmp_path / "ck.json"
        agent.save(ck)

        async def body():
            client = await make_client(ServiceConfig(checkpoint_path=str(ck)))
            sid = await new_session(client)
            await client.post(f"/sessions/{sid}/malfunction",
                              json={"kind": "step", "magnitude": 1.2})
            await advance(client, sid, 2)
            resp = await client.post(f"/sessions/{sid}/plan", json={})
            data = await resp.json()
            assert len(data["schedule"]) == 30
            assert len(data["predicted_pressure"]) == 30
            # planning ran on a snapshot: live session time unchanged
            status = await (await client.get(f"/sessions/{sid}")).json()
            assert status["t"] == 120.0
            await client.close()
        run(body())


class TestProcedure:
    def test_adopted_schedule_drives_setpoint(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            await client.post(f"/sessions/{sid}/malfunction",
                              json={"kind": "step", "magnitude": 1.2})
            resp = await client.post(f"/sessions/{sid}/procedure",
                                     json={"schedule": [0.75, 0.76]})
            assert resp.status == 200
            await advance(client, sid, 2)
            resp = await client.get(f"/sessions/{sid}/trace")
            frames = (await resp.json())["frames"]
            assert frames[0]["sensors"]["pc130_sv"] == 0.75
            assert frames[1]["sensors"]["pc130_sv"] == 0.76
            await client.close()
        run(body())

    def test_empty_schedule_is_noop(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            resp = await client.post(f"/sessions/{sid}/procedure",
                                     json={"schedule": []})
            assert resp.status == 200
            await advance(client, sid, 1)
            frames = (await (await client.get(f"/sessions/{sid}/trace")).json())["frames"]
            assert frames[0]["sensors"]["pc130_sv"] == 0.784
            await client.close()
        run(body())

    def test_out_of_bounds_setpoint_rejected(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            resp = await client.post(f"/sessions/{sid}/procedure",
                                     json={"schedule": [0.95]})
            assert resp.status == 400
            await client.close()
        run(body())


class TestIsolationAndReplay:
    def test_sessions_do_not_interfere(self):
        async def drive(client, sid, inject):
            if inject:
                await client.post(f"/sessions/{sid}/malfunction",
                                  json={"kind": "step", "magnitude": 1.2})
            await advance(client, sid, 3)

        async def body():
            client = await make_client()
            solo = await new_session(client)
            await drive(client, solo, inject=True)
            solo_frames = (await (await client.get(f"/sessions/{solo}/trace")).json())["frames"]

            a = await new_session(client)
            b = await new_session(client)
            await client.post(f"/sessions/{a}/malfunction",
                              json={"kind": "step", "magnitude": 1.2})
            # interleave commands on b between a's advances
            await advance(client, a, 1)
            await client.post(f"/sessions/{b}/malfunction",
                              json={"kind": "ramp", "magnitude": 0.95,
                                    "t_complete": 600})
            await advance(client, b, 2)
            await advance(client, a, 2)
            a_frames = (await (await client.get(f"/sessions/{a}/trace")).json())["frames"]
            assert a_frames == solo_frames
            await client.close()
        run(body())

    def test_event_log_replay_reproduces_trace_bit_for_bit(self):
        async def body():
            client = await make_client()
            sid = await new_session(client)
            await advance(client, sid, 2)
            await client.post(f"/sessions/{sid}/malfunction",
                              json={"kind": "ramp", "magnitude": 1.15,
                                    "t_complete": 300})
            await advance(client, sid, 4)
            await client.post(f"/sessions/{sid}/procedure",
                              json={"schedule": [0.76, 0.755, 0.75]})
            await advance(client, sid, 5)
            log = await (await client.get(f"/sessions/{sid}/log")).json()
            frames = (await (await client.get(f"/sessions/{sid}/trace")).json())["frames"]
            await client.close()
            return log, frames

        log, frames = run(body())
        replayed = replay_session(log["events"], log["minutes"])
        assert json.dumps(replayed) == json.dumps(frames)


def test_cors_headers_present():
    async def body():
        client = await make_client()
        resp = await client.options("/sessions")
        assert resp.status == 204
        assert resp.headers["Access-Control-Allow-Origin"] == "*"
        resp = await client.post("/sessions", json={"speed": 0})
        assert resp.headers["Access-Control-Allow-Origin"] == "*"
        await client.close()
    run(body())
