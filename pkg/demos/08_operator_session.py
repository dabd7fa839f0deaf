"""A scripted operator session against the live service.

Starts the HTTP/WebSocket service in-process, then plays the operator:
inject a surge, watch the trend drift, request a plan with explanation,
adopt the proposed schedule (from a checkpoint when available, otherwise
a hand schedule), and watch the pressure come back.

    python demos/08_operator_session.py [checkpoint]
"""

import asyncio
import sys
from pathlib import Path

from aiohttp.test_utils import TestClient, TestServer

from procrl.service import ServiceConfig, create_app

checkpoint = sys.argv[1] if len(sys.argv) > 1 else "runs/demo-fixed/checkpoint.json"
cfg = ServiceConfig(checkpoint_path=checkpoint if Path(checkpoint).exists() else None)
if cfg.checkpoint_path is None:
    print("(no checkpoint found; the plan will come without a proposed schedule)\n")


async def operator():
    client = TestClient(TestServer(create_app(cfg)))
    await client.start_server()
    sid = (await (await client.post("/sessions", json={"speed": 0})).json())["session_id"]
    print(f"session {sid[:8]} created, clock paused")

    await client.post(f"/sessions/{sid}/malfunction",
                      json={"kind": "step", "magnitude": 1.2})
    print("injected: step surge of the feed header to 120%")

    await client.post(f"/sessions/{sid}/clock", json={"advance": 5})
    frames = (await (await client.get(f"/sessions/{sid}/trace")).json())["frames"]
    print("\nfirst five minutes under PID alone:")
    for f in frames:
        print(f"  t={f['t']:>6.0f}s pressure={f['sensors']['vaporizer_pressure']:.5f} "
              f"reward_cum={f['reward_cum']:.3f}")

    plan = await (await client.post(f"/sessions/{sid}/plan", json={})).json()
    print("\ndiagnosis:", [(d["variable"], d["direction"]) for d in plan["diagnosis"]])
    print("plan targets:", [s["target"] for s in plan["plan"]["steps"]])
    print("explanation:")
    for line in plan["explanation"]["lines"]:
        print("  " + line)

    schedule = plan["schedule"] or [0.745] * 25
    await client.post(f"/sessions/{sid}/procedure", json={"schedule": schedule})
    print(f"\nadopted a {len(schedule)}-step setpoint schedule")

    await client.post(f"/sessions/{sid}/clock", json={"advance": 10})
    frames = (await (await client.get(f"/sessions/{sid}/trace")).json())["frames"]
    print("ten more minutes with the procedure active:")
    for f in frames[-10:]:
        print(f"  t={f['t']:>6.0f}s pressure={f['sensors']['vaporizer_pressure']:.5f} "
              f"sv={f['sensors']['pc130_sv']:.4f}")

    await client.delete(f"/sessions/{sid}")
    await client.close()
    print("\nsession closed")


asyncio.run(operator())
