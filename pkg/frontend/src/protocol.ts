/**
 * Message schema "skelforge-proto/1": one JSON object per line (TCP) or
 * per text frame (WebSocket). Every request gets exactly one reply with
 * the same id.
 */

export const PROTOCOL_VERSION = "skelforge-proto/1";

export type Vec2 = [number, number];

export interface TransformPayload {
  tx: number;
  ty: number;
  rot: number;
  scale: number;
}

export interface StrokePayload {
  points: Vec2[];
  closed: boolean;
}

export interface SkeletonJoint {
  id: number;
  x: number;
  y: number;
  radius: number;
}

export interface SkeletonPayload {
  joints: SkeletonJoint[];
  bones: [number, number][];
}

export interface PartPayload {
  id: number;
  seq: number;
  transform: TransformPayload;
  polygon: Vec2[];
  world_polygon: Vec2[];
  skeleton: SkeletonPayload;
  world_skeleton: SkeletonPayload;
  sskel_debug: [number, number, number, number][];
}

export interface HierarchyPayload {
  parent: number;
  child: number;
  attach: { type: "bone_split" | "joint_connect"; bone?: [number, number]; point?: Vec2; joint?: number };
  child_joint: number;
}

export interface SceneDelta {
  parts: PartPayload[];
  hierarchy: HierarchyPayload[];
  global_skeleton: SkeletonPayload;
  counts: { joints: number; bones: number; parts: number };
  config: Record<string, number>;
  scope: { level: "branch" | "subpart" | "global"; target: number | null };
  created?: number;
  saved?: string;
  document?: unknown;
}

export interface Reply {
  proto: string;
  id: number;
  status: "OK" | "ERROR";
  delta?: SceneDelta;
  error?: { code: string; message: string };
  timing_us?: Record<string, number>;
}

export type RequestKind =
  | "CreatePart"
  | "MovePart"
  | "SetConfig"
  | "SetScope"
  | "GetScene"
  | "SaveScene"
  | "LoadScene";

export interface Request {
  proto: string;
  id: number;
  kind: RequestKind;
  [key: string]: unknown;
}

export function encodeRequest(req: Request): string {
  return JSON.stringify(req);
}

export function decodeReply(line: string): Reply {
  const parsed = JSON.parse(line) as Reply;
  if (parsed.proto !== PROTOCOL_VERSION) {
    throw new Error(`unexpected protocol version ${parsed.proto}`);
  }
  if (parsed.status !== "OK" && parsed.status !== "ERROR") {
    throw new Error("reply has no status");
  }
  return parsed;
}

export const CONFIG_DEFAULTS: Record<string, number> = {
  eps_s: 5.0,
  eps_m: 30.0,
  eps_t: 30.0,
  eps_c: 10.0,
  alpha_s: 1.0,
};
