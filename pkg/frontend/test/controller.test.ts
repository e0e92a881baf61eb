import { describe, expect, it } from "vitest";

import { MockChannel } from "../src/channel.js";
import { SessionClient } from "../src/client.js";
import { CanvasController, MOVE_MESSAGES_PER_SECOND, pointInRing } from "../src/controller.js";
import { CountingRenderer } from "../src/render.js";
import { CREATE_LIMB, CREATE_TORSO, SET_CONFIG } from "./replies.js";

function rig(options: { respond?: boolean } = {}) {
  const channel = new MockChannel();
  if (options.respond !== false) {
    channel.respondWith((line) => {
      const msg = JSON.parse(line);
      const canned =
        msg.kind === "SetConfig" || msg.kind === "SetScope" || msg.kind === "MovePart"
          ? SET_CONFIG
          : msg.stroke || msg.polygon?.[0]?.[0] === 0 ? CREATE_TORSO : CREATE_LIMB;
      return JSON.stringify({ ...canned, id: msg.id });
    });
  }
  const client = new SessionClient(channel);
  const renderer = new CountingRenderer();
  let clock = 0;
  const controller = new CanvasController(client, renderer, {
    now: () => clock,
    confirmAutoClose: () => true,
  });
  return {
    channel, client, renderer, controller,
    tick: (ms: number) => { clock += ms; },
    sentKinds: () => channel.sent.map((l) => JSON.parse(l).kind),
  };
}

function traceBlob(): [number, number][] {
  const pts: [number, number][] = [];
  for (let k = 0; k < 120; k++) {
    const a = (2 * Math.PI * k) / 120;
    pts.push([150 * Math.cos(a), 90 * Math.sin(a)]);
  }
  return pts;
}

describe("drawing", () => {
  it("sends the pointer trace as one CreatePart and renders the skeleton overlay promptly", async () => {
    const { controller, renderer, sentKinds } = rig();
    const trace = traceBlob();
    controller.pointerDown(...trace[0]);
    for (const p of trace.slice(1)) controller.pointerMove(...p);
    const t0 = performance.now();
    await controller.pointerUp();
    const elapsed = performance.now() - t0;
    expect(sentKinds()).toEqual(["CreatePart"]);
    expect(renderer.frames).toBe(1);
    expect(renderer.joints).toBeGreaterThan(0);
    // render budget after the reply lands
    expect(elapsed).toBeLessThan(100);
    expect(controller.lastRenderMs).toBeLessThan(100);
  });

  it("rendered joint and bone counts equal the delta payload", async () => {
    const { controller, client, renderer } = rig();
    await client.request("CreatePart", { polygon: [[0, 0], [400, 0], [400, 100], [0, 100]] });
    await client.request("CreatePart", { polygon: [[150, 60], [190, 60], [190, 260], [150, 260]] });
    expect(renderer.joints).toBe(CREATE_LIMB.delta.counts.joints);
    expect(renderer.bones).toBe(CREATE_LIMB.delta.counts.bones);
    expect(renderer.polygons).toBe(CREATE_LIMB.delta.counts.parts);
    void controller;
  });

  it("asks before closing a visibly open stroke and drops it on refusal", async () => {
    const channel = new MockChannel();
    const client = new SessionClient(channel);
    const controller = new CanvasController(client, new CountingRenderer(), {
      confirmAutoClose: () => false,
    });
    controller.pointerDown(0, 0);
    for (let x = 1; x <= 60; x++) controller.pointerMove(x * 5, 3);
    await controller.pointerUp();
    expect(channel.sent.length).toBe(0);
  });
});

describe("no client-side geometry", () => {
  it("freezes the view when the service stops answering", async () => {
    const { controller, channel, renderer, client } = rig();
    await client.request("CreatePart", { polygon: [[0, 0], [400, 0], [400, 100], [0, 100]] });
    const before = { j: renderer.joints, rev: client.state.revision };
    channel.disabled = true;
    controller.pointerDown(...traceBlob()[0]);
    for (const p of traceBlob().slice(1)) controller.pointerMove(...p);
    void controller.pointerUp();  // no reply will ever come back
    await new Promise((r) => setTimeout(r, 25));
    expect(client.state.revision).toBe(before.rev);
    expect(renderer.joints).toBe(before.j);
  });
});

describe("moving", () => {
  it("throttles MovePart to the message budget", async () => {
    const { controller, client, channel, tick } = rig();
    await client.request("CreatePart", { polygon: [[0, 0], [400, 0], [400, 100], [0, 100]] });
    channel.sent.length = 0;
    controller.tool = "move";
    controller.pointerDown(200, 50);
    expect(controller.selectedPart).not.toBeNull();
    for (let k = 0; k < 300; k++) {
      controller.pointerMove(200 + k, 50);
      tick(1);  // 1 ms per pointer sample: 300 samples in 0.3 s
    }
    await controller.pointerUp();
    await new Promise((r) => setTimeout(r, 5));
    const moves = channel.sent.map((l) => JSON.parse(l))
      .filter((m) => m.kind === "MovePart");
    // 0.3 s at 30 msg/s allows ~9 plus the final flush
    expect(moves.length).toBeGreaterThan(2);
    expect(moves.length).toBeLessThanOrEqual(0.3 * MOVE_MESSAGES_PER_SECOND + 2);
    const last = moves[moves.length - 1];
    expect(last.transform.tx).toBeCloseTo(299, 0);
  });

  it("hit-tests the drawn outline for selection", async () => {
    const { controller, client } = rig();
    await client.request("CreatePart", { polygon: [[0, 0], [400, 0], [400, 100], [0, 100]] });
    expect(controller.hitTest(200, 50)).toBe(0);
    expect(controller.hitTest(900, 900)).toBeNull();
    expect(pointInRing(0.5, 0.5, [[0, 0], [1, 0], [1, 1], [0, 1]])).toBe(true);
  });
});

describe("refine panel", () => {
  it("sliders send SetConfig and the reply re-renders with delta counts", async () => {
    const { controller, renderer, channel } = rig();
    await controller.setSlider("eps_c", 25.0);
    const sent = JSON.parse(channel.sent[0]);
    expect(sent.kind).toBe("SetConfig");
    expect(sent.config).toEqual({ eps_c: 25.0 });
    expect(renderer.frames).toBe(1);
    expect(renderer.joints).toBe(SET_CONFIG.delta.counts.joints);
  });

  it("reset restores the documented defaults", async () => {
    const { controller, channel } = rig();
    await controller.resetSliders();
    const sent = JSON.parse(channel.sent[0]);
    expect(sent.config.eps_s).toBe(5.0);
    expect(sent.config.eps_m).toBe(30.0);
    expect(sent.config.eps_t).toBe(30.0);
    expect(sent.config.eps_c).toBe(10.0);
  });

  it("scope picker sends SetScope", async () => {
    const { controller, channel } = rig();
    await controller.pickScope("subpart", 1);
    const sent = JSON.parse(channel.sent[0]);
    expect(sent.kind).toBe("SetScope");
    expect(sent.scope).toEqual({ level: "subpart", target: 1 });
  });
});
