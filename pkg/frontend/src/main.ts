/**
 * Browser entry: wires the canvas, the toolbar and the refinement panel
 * to a WebSocket session. Serve the engine with `skelforge serve` and
 * open index.html; the client connects to the HTTP port's /session.
 */
import { WebSocketChannel } from "./channel.js";
import { SessionClient } from "./client.js";
import { CanvasController } from "./controller.js";
import { CONFIG_DEFAULTS } from "./protocol.js";
import { Canvas2DRenderer } from "./render.js";

const SLIDERS: Array<{ key: string; label: string; min: number; max: number; step: number }> = [
  { key: "eps_s", label: "simplify", min: 0, max: 40, step: 0.5 },
  { key: "eps_m", label: "merge", min: 0, max: 120, step: 1 },
  { key: "eps_t", label: "prune", min: 0, max: 120, step: 1 },
  { key: "eps_c", label: "collapse", min: 0, max: 60, step: 0.5 },
  { key: "alpha_s", label: "shape weight", min: 0, max: 4, step: 0.1 },
];

function main(): void {
  const canvas = document.getElementById("canvas") as HTMLCanvasElement;
  const toolbar = document.getElementById("toolbar") as HTMLDivElement;
  const panel = document.getElementById("panel") as HTMLDivElement;
  const status = document.getElementById("status") as HTMLDivElement;
  const ctx = canvas.getContext("2d")!;

  const host = location.hostname || "127.0.0.1";
  const port = Number(new URLSearchParams(location.search).get("port") ?? 7342);
  const socket = new WebSocket(`ws://${host}:${port}/session`);
  const channel = new WebSocketChannel(socket);
  const client = new SessionClient(channel);
  const view = { scale: 1.0, ox: 40, oy: canvas.height - 40 };
  const controller = new CanvasController(client, new Canvas2DRenderer(ctx, view), {
    confirmAutoClose: (gap) => window.confirm(
      `Stroke ends ${gap.toFixed(0)} px apart. Close it into a shape?`),
  });

  client.onError((code, message) => {
    status.textContent = `${code}: ${message}`;
    status.className = "toast error";
    setTimeout(() => { status.className = "toast"; }, 4000);
  });
  client.onDelta((state) => {
    status.textContent =
      `${state.counts.parts} parts | ${state.counts.joints} joints | ` +
      `${state.counts.bones} bones | scope ${state.scope.level}`;
  });

  for (const tool of ["draw", "move", "refine-scope"] as const) {
    const btn = document.createElement("button");
    btn.textContent = tool;
    btn.onclick = () => { controller.tool = tool; };
    toolbar.appendChild(btn);
  }
  for (const layer of ["polygon", "straightSkeleton", "skeleton", "capsules"] as const) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = controller.overlays[layer];
    box.onchange = () => {
      controller.overlays[layer] = box.checked;
      controller.repaint();
    };
    label.append(box, ` ${layer}`);
    toolbar.appendChild(label);
  }

  for (const def of SLIDERS) {
    const row = document.createElement("div");
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = String(def.min);
    slider.max = String(def.max);
    slider.step = String(def.step);
    slider.value = String(CONFIG_DEFAULTS[def.key]);
    slider.oninput = () => void controller.setSlider(def.key, Number(slider.value));
    const caption = document.createElement("span");
    caption.textContent = def.label;
    row.append(caption, slider);
    panel.appendChild(row);
  }
  const reset = document.createElement("button");
  reset.textContent = "reset thresholds";
  reset.onclick = () => {
    void controller.resetSliders();
    panel.querySelectorAll("input[type=range]").forEach((el, i) => {
      (el as HTMLInputElement).value = String(CONFIG_DEFAULTS[SLIDERS[i].key]);
    });
  };
  panel.appendChild(reset);

  const toWorld = (ev: PointerEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    const x = (ev.clientX - rect.left - view.ox) / view.scale;
    const y = -(ev.clientY - rect.top - view.oy) / view.scale;
    return [x, y];
  };
  canvas.addEventListener("pointerdown", (ev) => controller.pointerDown(...toWorld(ev)));
  canvas.addEventListener("pointermove", (ev) => controller.pointerMove(...toWorld(ev)));
  canvas.addEventListener("pointerup", () => void controller.pointerUp());
}

window.addEventListener("DOMContentLoaded", main);
