/**
 * Canvas interaction: drawing strokes, dragging parts, refinement dials.
 * Every action round-trips through the service; the view repaints only
 * when a delta lands.
 */
import { SceneState, SessionClient } from "./client.js";
import { CONFIG_DEFAULTS } from "./protocol.js";
import { DEFAULT_OVERLAYS, OverlayToggles, Renderer, renderScene } from "./render.js";

export type Tool = "draw" | "move" | "refine-scope";

export const MOVE_MESSAGES_PER_SECOND = 30;

export interface ControllerOptions {
  /** asks the user whether a visibly open stroke should be closed */
  confirmAutoClose?: (gap: number) => boolean;
  now?: () => number;
}

export class CanvasController {
  tool: Tool = "draw";
  overlays: OverlayToggles = { ...DEFAULT_OVERLAYS };
  selectedPart: number | null = null;
  lastRenderMs = 0;

  private strokePoints: [number, number][] = [];
  private drawing = false;
  private dragStart: [number, number] | null = null;
  private dragBase: { tx: number; ty: number; rot: number; scale: number } | null = null;
  private lastMoveSent = 0;
  private pendingMove: { tx: number; ty: number; rot: number; scale: number } | null = null;
  private confirmAutoClose: (gap: number) => boolean;
  private now: () => number;

  constructor(
    readonly client: SessionClient,
    private renderer: Renderer,
    options: ControllerOptions = {},
  ) {
    this.confirmAutoClose = options.confirmAutoClose ?? (() => true);
    this.now = options.now ?? (() => Date.now());
    client.onDelta((state) => this.render(state));
  }

  render(state: SceneState): void {
    const t0 = this.now();
    renderScene(this.renderer, state, this.overlays, this.selectedPart);
    this.lastRenderMs = this.now() - t0;
  }

  repaint(): void {
    this.render(this.client.state);
  }

  // ------------------------------------------------------------- drawing

  pointerDown(x: number, y: number): void {
    if (this.tool === "draw") {
      this.drawing = true;
      this.strokePoints = [[x, y]];
    } else if (this.tool === "move") {
      this.selectedPart = this.hitTest(x, y);
      if (this.selectedPart !== null) {
        const part = this.client.state.parts.get(this.selectedPart);
        this.dragStart = [x, y];
        this.dragBase = part ? { ...part.transform } : null;
      }
      this.repaint();
    }
  }

  pointerMove(x: number, y: number): void {
    if (this.tool === "draw" && this.drawing) {
      this.strokePoints.push([x, y]);
    } else if (this.tool === "move" && this.selectedPart !== null && this.dragBase) {
      const dx = x - (this.dragStart as [number, number])[0];
      const dy = y - (this.dragStart as [number, number])[1];
      this.queueMove({
        tx: this.dragBase.tx + dx,
        ty: this.dragBase.ty + dy,
        rot: this.dragBase.rot,
        scale: this.dragBase.scale,
      });
    }
  }

  async pointerUp(): Promise<void> {
    if (this.tool === "draw" && this.drawing) {
      this.drawing = false;
      const pts = this.strokePoints;
      this.strokePoints = [];
      if (pts.length < 8) return;
      const gap = distance(pts[0], pts[pts.length - 1]);
      const span = strokeSpan(pts);
      if (gap > 0.15 * span && !this.confirmAutoClose(gap)) {
        return;
      }
      await this.client.createPartFromStroke(pts);
    } else if (this.tool === "move") {
      await this.flushMove();
      this.dragStart = null;
      this.dragBase = null;
    }
  }

  // -------------------------------------------------------------- moving

  /** MovePart messages are throttled to the protocol budget. */
  private queueMove(transform: { tx: number; ty: number; rot: number; scale: number }): void {
    this.pendingMove = transform;
    const interval = 1000 / MOVE_MESSAGES_PER_SECOND;
    const t = this.now();
    if (t - this.lastMoveSent >= interval) {
      void this.flushMove();
    }
  }

  async flushMove(): Promise<void> {
    if (this.pendingMove === null || this.selectedPart === null) return;
    const transform = this.pendingMove;
    this.pendingMove = null;
    this.lastMoveSent = this.now();
    await this.client.movePart(this.selectedPart, transform);
  }

  /** Pick the topmost part whose outline contains the pointer. */
  hitTest(x: number, y: number): number | null {
    const parts = [...this.client.state.parts.values()].sort((a, b) => b.seq - a.seq);
    for (const part of parts) {
      if (pointInRing(x, y, part.world_polygon)) return part.id;
    }
    return null;
  }

  // ------------------------------------------------------------ refining

  async setSlider(name: keyof typeof CONFIG_DEFAULTS | string, value: number): Promise<void> {
    await this.client.setConfig({ [name]: value });
  }

  async resetSliders(): Promise<void> {
    await this.client.setConfig({ ...CONFIG_DEFAULTS });
  }

  async pickScope(level: "branch" | "subpart" | "global", target: number | null): Promise<void> {
    await this.client.setScope(level, target);
  }
}

function distance(a: [number, number], b: [number, number]): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1]);
}

function strokeSpan(pts: [number, number][]): number {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const [x, y] of pts) {
    minX = Math.min(minX, x);
    minY = Math.min(minY, y);
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  return Math.hypot(maxX - minX, maxY - minY);
}

/** Crossing-parity containment used only for pointer picking. */
export function pointInRing(x: number, y: number, ring: [number, number][]): boolean {
  let inside = false;
  for (let i = 0, j = ring.length - 1; i < ring.length; j = i++) {
    const [xi, yi] = ring[i];
    const [xj, yj] = ring[j];
    if ((yi > y) !== (yj > y) && x < xi + ((y - yi) * (xj - xi)) / (yj - yi)) {
      inside = !inside;
    }
  }
  return inside;
}
