import { describe, expect, it } from "vitest";
import {
  COURT_FLOOR_COLOR,
  NET_COLOR,
  PREDICTION_COLOR,
  PROVENANCE_STYLE,
  TRAJECTORY_LINE_COLOR,
} from "../src/overlay.js";
import { click, mountTracked, q } from "./helpers.js";

describe("overlay rendering", () => {
  it("renders a full session in overlay-only mode with no frame imagery", async () => {
    const { ctx, root } = await mountTracked();

    // no backdrop was ever supplied, so nothing may be blitted
    expect(ctx.ops.filter((o) => o.op === "drawImage")).toHaveLength(0);

    const ops = ctx.lastRender();
    // all 31 trajectory points drawn with their provenance encoding
    expect(ctx.fillsWith(PROVENANCE_STYLE.detected.color, ops)).toBe(29);
    expect(ctx.fillsWith(PROVENANCE_STYLE.coasted.color, ops)).toBe(2);
    expect(ctx.strokesWith(TRAJECTORY_LINE_COLOR, ops)).toBe(1);
    // court schematic stands in for the missing video frame
    expect(ctx.fillsWith(COURT_FLOOR_COLOR, ops)).toBe(1);
    expect(ctx.strokesWith(NET_COLOR, ops)).toBe(1);

    // and the panels carry the full session: report, status, scale
    expect(q(root, "peak-speed").textContent).toContain("178.50");
    expect(q(root, "marker-speed").textContent).toContain("43.26");
    expect(q(root, "status").textContent).toContain("status:");
    expect(q(root, "scale-factor").textContent).toContain("m/px");
    const rows = q(root, "report-table").querySelectorAll("tr");
    expect(rows.length).toBe(29); // header + 28 segments
  });

  it("draws candidate boxes and the Kalman prediction when stepping frames", async () => {
    const { app, ctx, root } = await mountTracked();
    // frame 0 seeds the track: candidates but no prediction yet
    expect(ctx.countOp("strokeRect")).toBeGreaterThanOrEqual(2);
    expect(ctx.strokesWith(PREDICTION_COLOR)).toBe(0);

    click(root, "next-frame");
    await app.idle();
    expect(q(root, "frame-label").textContent).toContain("frame 1/30");
    expect(ctx.strokesWith(PREDICTION_COLOR)).toBe(2); // crosshair + circle
    const boxes = ctx
      .lastRender()
      .filter((o) => o.op === "strokeRect" && o.strokeStyle !== "#7f94a8");
    expect(boxes.length).toBe(2); // two candidates survive the filter on frame 1
  });

  it("keeps frame stepping inside the stream bounds", async () => {
    const { app, root } = await mountTracked();
    click(root, "prev-frame");
    await app.idle();
    expect(q(root, "frame-label").textContent).toContain("frame 0/30");
    for (let i = 0; i < 40; i++) {
      click(root, "next-frame");
    }
    await app.idle();
    expect(q(root, "frame-label").textContent).toContain("frame 30/30");
  });

  it("blits the supplied frame image instead of the schematic", async () => {
    const { app, ctx } = await mountTracked();
    const image = { fake: "frame-0" };
    app.setBackdrop(0, image);
    const ops = ctx.lastRender();
    const blits = ops.filter((o) => o.op === "drawImage");
    expect(blits).toHaveLength(1);
    expect(blits[0].args[0]).toBe(image);
    expect(ctx.fillsWith(COURT_FLOOR_COLOR, ops)).toBe(0);
  });

  it("ring-highlights the selected point", async () => {
    const { app, ctx, root } = await mountTracked();
    app.setMode("verify");
    const canvas = q(root, "frame-canvas");
    canvas.dispatchEvent(new MouseEvent("mousedown", { clientX: 19, clientY: 66 }));
    canvas.dispatchEvent(new MouseEvent("mouseup", { clientX: 19, clientY: 66 }));
    const ops = ctx.lastRender();
    expect(ctx.strokesWith("#ff5050", ops)).toBe(1);
    expect(q(root, "selection").textContent).toContain("(detected)");
  });
});
