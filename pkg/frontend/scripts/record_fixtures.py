"""Record live service responses as contract-test fixtures.

Drives a real in-process service session through the console's exact call
sequence and dumps each response under tests/fixtures/.  Re-run after any
service change, then `npm test` proves the console still understands it.

    python scripts/record_fixtures.py [checkpoint.json]
"""

import asyncio
import json
import sys
from pathlib import Path

from aiohttp.test_utils import TestClient, TestServer

from procrl.service import ServiceConfig, create_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


async def record(checkpoint: str = None) -> None:
    cfg = ServiceConfig(checkpoint_path=checkpoint)
    client = TestClient(TestServer(create_app(cfg)))
    await client.start_server()
    out = {}

    resp = await client.post("/sessions", json={"speed": 0})
    out["session_created"] = await resp.json()
    sid = out["session_created"]["session_id"]

    await client.post(f"/sessions/{sid}/malfunction",
                      json={"kind": "step", "magnitude": 1.2})
    await client.post(f"/sessions/{sid}/clock", json={"advance": 3})

    out["status"] = await (await client.get(f"/sessions/{sid}")).json()
    out["plan_bundle"] = await (await client.post(f"/sessions/{sid}/plan", json={})).json()
    out["trace"] = await (await client.get(f"/sessions/{sid}/trace")).json()

    steady = await client.post("/sessions", json={"speed": 0})
    steady_id = (await steady.json())["session_id"]
    out["plan_bundle_steady"] = await (
        await client.post(f"/sessions/{steady_id}/plan", json={})).json()

    await client.close()

    FIXTURES.mkdir(parents=True, exist_ok=True)
    for name, payload in out.items():
        path = FIXTURES / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {path.relative_to(FIXTURES.parent.parent)}")


if __name__ == "__main__":
    asyncio.run(record(sys.argv[1] if len(sys.argv) > 1 else None))
