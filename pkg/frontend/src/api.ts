/** Typed client for the session service; every response passes a validator. */

import {
  assertFrame,
  assertPlanBundle,
  assertSessionCreated,
  assertStatus,
} from "./contract";
import { Ack, Frame, PlanBundle, SessionCreated, SessionStatus } from "./types";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (payload as { error?: string }).error ?? response.statusText;
      throw new ApiError(response.status, detail);
    }
    return payload;
  }

  async createSession(speed: number): Promise<SessionCreated> {
    return assertSessionCreated(await this.request("POST", "/sessions", { speed }));
  }

  async status(id: string): Promise<SessionStatus> {
    return assertStatus(await this.request("GET", `/sessions/${id}`));
  }

  async setClock(id: string, body: { speed?: number; advance?: number }): Promise<Ack> {
    return (await this.request("POST", `/sessions/${id}/clock`, body)) as Ack;
  }

  async injectMalfunction(
    id: string,
    scenario: { kind: string; magnitude: number; t_complete: number },
  ): Promise<Ack> {
    return (await this.request("POST", `/sessions/${id}/malfunction`, scenario)) as Ack;
  }

  async requestPlan(id: string): Promise<PlanBundle> {
    return assertPlanBundle(await this.request("POST", `/sessions/${id}/plan`, {}));
  }

  async adoptProcedure(id: string, schedule: number[]): Promise<Ack> {
    return (await this.request("POST", `/sessions/${id}/procedure`, { schedule })) as Ack;
  }

  async trace(id: string): Promise<Frame[]> {
    const payload = (await this.request("GET", `/sessions/${id}/trace`)) as {
      frames: unknown[];
    };
    return payload.frames.map((f, i) => assertFrame(f, `frames[${i}]`));
  }

  async closeSession(id: string): Promise<Ack> {
    return (await this.request("DELETE", `/sessions/${id}`)) as Ack;
  }

  /** One WebSocket subscription per session; frames are validated too. */
  openStream(id: string, onFrame: (frame: Frame) => void, onClose?: () => void): WebSocket {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const socket = new WebSocket(`${wsBase}/sessions/${id}/stream`);
    socket.onmessage = (event) => onFrame(assertFrame(JSON.parse(event.data)));
    if (onClose) socket.onclose = onClose;
    return socket;
  }
}
