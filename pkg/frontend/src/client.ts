/**
 * Session client: request/reply correlation plus the canvas-side scene
 * state. The state is nothing but an echo of the last server delta; no
 * geometry is ever derived locally.
 */
import { LineChannel } from "./channel.js";
import {
  PROTOCOL_VERSION,
  PartPayload,
  Reply,
  Request,
  RequestKind,
  SceneDelta,
  decodeReply,
  encodeRequest,
} from "./protocol.js";

export interface SceneState {
  parts: Map<number, PartPayload>;
  hierarchy: SceneDelta["hierarchy"];
  globalSkeleton: SceneDelta["global_skeleton"];
  counts: SceneDelta["counts"];
  config: Record<string, number>;
  scope: SceneDelta["scope"];
  revision: number;
}

export function emptyState(): SceneState {
  return {
    parts: new Map(),
    hierarchy: [],
    globalSkeleton: { joints: [], bones: [] },
    counts: { joints: 0, bones: 0, parts: 0 },
    config: {},
    scope: { level: "global", target: null },
    revision: 0,
  };
}

type Pending = {
  resolve: (reply: Reply) => void;
  reject: (err: Error) => void;
};

export class SessionClient {
  readonly state: SceneState = emptyState();
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private deltaHandlers: Array<(state: SceneState) => void> = [];
  private errorHandlers: Array<(code: string, message: string) => void> = [];

  constructor(private channel: LineChannel) {
    channel.onLine((line) => this.receive(line));
    channel.onClose(() => {
      for (const p of this.pending.values()) {
        p.reject(new Error("connection closed"));
      }
      this.pending.clear();
    });
  }

  onDelta(handler: (state: SceneState) => void): void {
    this.deltaHandlers.push(handler);
  }

  onError(handler: (code: string, message: string) => void): void {
    this.errorHandlers.push(handler);
  }

  request(kind: RequestKind, payload: Record<string, unknown> = {}): Promise<Reply> {
    const id = this.nextId++;
    const msg: Request = { proto: PROTOCOL_VERSION, id, kind, ...payload };
    return new Promise<Reply>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.channel.send(encodeRequest(msg));
    });
  }

  createPartFromStroke(points: [number, number][]): Promise<Reply> {
    return this.request("CreatePart", { stroke: { points, closed: true } });
  }

  movePart(part: number, transform: { tx: number; ty: number; rot: number; scale: number }): Promise<Reply> {
    return this.request("MovePart", { part, transform });
  }

  setConfig(config: Record<string, number>): Promise<Reply> {
    return this.request("SetConfig", { config });
  }

  setScope(level: "branch" | "subpart" | "global", target: number | null): Promise<Reply> {
    return this.request("SetScope", { scope: { level, target } });
  }

  private receive(line: string): void {
    let reply: Reply;
    try {
      reply = decodeReply(line);
    } catch {
      return;
    }
    const pending = this.pending.get(reply.id);
    if (pending) {
      this.pending.delete(reply.id);
      pending.resolve(reply);
    }
    if (reply.status === "ERROR" && reply.error) {
      for (const h of this.errorHandlers) h(reply.error.code, reply.error.message);
      return;
    }
    if (reply.delta) {
      this.applyDelta(reply.delta);
    }
  }

  private applyDelta(delta: SceneDelta): void {
    const s = this.state;
    if (delta.document !== undefined) {
      // a full document reply (GetScene/LoadScene) resets the echo
      s.parts.clear();
    }
    for (const part of delta.parts) {
      s.parts.set(part.id, part);
    }
    s.hierarchy = delta.hierarchy;
    s.globalSkeleton = delta.global_skeleton;
    s.counts = delta.counts;
    s.config = delta.config;
    s.scope = delta.scope;
    s.revision += 1;
    for (const h of this.deltaHandlers) h(s);
  }
}
