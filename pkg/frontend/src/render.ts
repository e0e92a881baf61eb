/**
 * Rendering of the scene echo. Layer order and colours follow the debug
 * convention used throughout the engine: outlines black, offset fronts
 * and slice debug green, skeletons red.
 */
import { SceneState } from "./client.js";
import { PartPayload, SkeletonPayload } from "./protocol.js";

export interface OverlayToggles {
  polygon: boolean;
  straightSkeleton: boolean;
  skeleton: boolean;
  capsules: boolean;
  // reserved: the wire protocol does not carry cylinder regions or
  // slices yet, so these layers stay empty when enabled
  omegaRegion: boolean;
  slices: boolean;
}

export const DEFAULT_OVERLAYS: OverlayToggles = {
  polygon: true,
  straightSkeleton: false,
  skeleton: true,
  capsules: false,
  omegaRegion: false,
  slices: false,
};

export interface Renderer {
  begin(): void;
  drawPolygon(points: [number, number][], color: string, width: number): void;
  drawSegment(x1: number, y1: number, x2: number, y2: number, color: string, width: number): void;
  drawJoint(x: number, y: number, radius: number, color: string): void;
  drawDisc(x: number, y: number, radius: number, color: string): void;
  end(): void;
}

const PART_COLORS = ["#202020", "#205080", "#208050", "#805020", "#802060", "#508020"];

export function partColor(seq: number, isRoot: boolean): string {
  return isRoot ? PART_COLORS[0] : PART_COLORS[1 + (seq % (PART_COLORS.length - 1))];
}

export function renderScene(r: Renderer, state: SceneState,
                            overlays: OverlayToggles,
                            selected: number | null = null): void {
  r.begin();
  const roots = new Set<number>();
  const children = new Set(state.hierarchy.map((e) => e.child));
  for (const id of state.parts.keys()) {
    if (!children.has(id)) roots.add(id);
  }
  for (const part of state.parts.values()) {
    if (overlays.polygon) {
      const color = part.id === selected ? "#cc6600" : partColor(part.seq, roots.has(part.id));
      r.drawPolygon(part.world_polygon, color, part.id === selected ? 2.5 : 1.5);
    }
    if (overlays.straightSkeleton) {
      for (const [x1, y1, x2, y2] of part.sskel_debug) {
        r.drawSegment(x1, y1, x2, y2, "#2a8f2a", 0.6);
      }
    }
    if (overlays.capsules) {
      drawCapsules(r, part);
    }
  }
  if (overlays.skeleton) {
    drawSkeleton(r, state.globalSkeleton);
  }
  r.end();
}

function drawSkeleton(r: Renderer, skeleton: SkeletonPayload): void {
  const byId = new Map(skeleton.joints.map((j) => [j.id, j]));
  for (const [a, b] of skeleton.bones) {
    const ja = byId.get(a);
    const jb = byId.get(b);
    if (ja && jb) r.drawSegment(ja.x, ja.y, jb.x, jb.y, "#cc2222", 2.0);
  }
  for (const j of skeleton.joints) {
    r.drawJoint(j.x, j.y, 3.5, "#cc2222");
  }
}

function drawCapsules(r: Renderer, part: PartPayload): void {
  const skeleton = part.world_skeleton;
  const byId = new Map(skeleton.joints.map((j) => [j.id, j]));
  for (const j of skeleton.joints) {
    r.drawDisc(j.x, j.y, j.radius, "rgba(80,130,200,0.25)");
  }
  for (const [a, b] of skeleton.bones) {
    const ja = byId.get(a);
    const jb = byId.get(b);
    if (!ja || !jb) continue;
    // tapered capsule hinted by a few interpolated discs
    for (let t = 0.25; t < 1.0; t += 0.25) {
      const x = ja.x + t * (jb.x - ja.x);
      const y = ja.y + t * (jb.y - ja.y);
      const rad = ja.radius + t * (jb.radius - ja.radius);
      r.drawDisc(x, y, rad, "rgba(80,130,200,0.12)");
    }
  }
}

/** Counts primitives instead of painting; test double for the canvas. */
export class CountingRenderer implements Renderer {
  joints = 0;
  bones = 0;
  polygons = 0;
  segments = 0;
  discs = 0;
  frames = 0;

  begin(): void {
    this.joints = this.bones = this.polygons = this.segments = this.discs = 0;
  }

  drawPolygon(): void {
    this.polygons += 1;
  }

  drawSegment(_x1: number, _y1: number, _x2: number, _y2: number, color: string): void {
    this.segments += 1;
    if (color === "#cc2222") this.bones += 1;
  }

  drawJoint(): void {
    this.joints += 1;
  }

  drawDisc(): void {
    this.discs += 1;
  }

  end(): void {
    this.frames += 1;
  }
}

/** HTML canvas painter with y flipped so world +y points up. */
export class Canvas2DRenderer implements Renderer {
  constructor(private ctx: CanvasRenderingContext2D,
              private view: { scale: number; ox: number; oy: number }) {}

  private tx(x: number): number {
    return x * this.view.scale + this.view.ox;
  }

  private ty(y: number): number {
    return -y * this.view.scale + this.view.oy;
  }

  begin(): void {
    const c = this.ctx.canvas;
    this.ctx.clearRect(0, 0, c.width, c.height);
  }

  drawPolygon(points: [number, number][], color: string, width: number): void {
    if (!points.length) return;
    const ctx = this.ctx;
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.beginPath();
    ctx.moveTo(this.tx(points[0][0]), this.ty(points[0][1]));
    for (const [x, y] of points.slice(1)) ctx.lineTo(this.tx(x), this.ty(y));
    ctx.closePath();
    ctx.stroke();
  }

  drawSegment(x1: number, y1: number, x2: number, y2: number, color: string, width: number): void {
    const ctx = this.ctx;
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.beginPath();
    ctx.moveTo(this.tx(x1), this.ty(y1));
    ctx.lineTo(this.tx(x2), this.ty(y2));
    ctx.stroke();
  }

  drawJoint(x: number, y: number, radius: number, color: string): void {
    const ctx = this.ctx;
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(this.tx(x), this.ty(y), radius, 0, Math.PI * 2);
    ctx.fill();
  }

  drawDisc(x: number, y: number, radius: number, color: string): void {
    const ctx = this.ctx;
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(this.tx(x), this.ty(y), radius * this.view.scale, 0, Math.PI * 2);
    ctx.fill();
  }

  end(): void {}
}
