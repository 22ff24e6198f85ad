import { describe, expect, it } from "vitest";
import { RULER_COLOR } from "../src/overlay.js";
import {
  canvasClick,
  click,
  input,
  mountApp,
  mountTracked,
  q,
} from "./helpers.js";

describe("calibration interaction", () => {
  it("displays the API-computed scale factor for the 600 px / 3.0 m case", async () => {
    const { app, mock, root } = await mountApp();
    app.setMode("calibrate");
    // canvas coords are half of video coords: (0,0) and (300,0) -> video (0,0), (600,0)
    canvasClick(root, 0, 0);
    canvasClick(root, 300, 0);
    input(root, "distance-input", "3.0");
    click(root, "apply-calibration");
    await app.idle();

    const putCall = mock.calls.find(
      (c) => c.method === "PUT" && c.path.endsWith("/calibration"),
    );
    expect(putCall).toBeDefined();
    expect(q(root, "scale-factor").textContent).toContain("0.005");
    expect(q(root, "status").textContent).toContain("calibrated");
  });

  it("shows a ruler overlay between the two clicked points", async () => {
    const { app, ctx, root } = await mountApp();
    app.setMode("calibrate");
    canvasClick(root, 0, 0);
    canvasClick(root, 300, 0);
    const ops = ctx.lastRender();
    expect(ctx.fillsWith(RULER_COLOR, ops)).toBe(2); // endpoint dots
    expect(ctx.strokesWith(RULER_COLOR, ops)).toBeGreaterThanOrEqual(1);
  });

  it("surfaces the degenerate-calibration error inline for coincident clicks", async () => {
    const { app, root } = await mountApp();
    app.setMode("calibrate");
    canvasClick(root, 100, 100);
    canvasClick(root, 100, 100);
    input(root, "distance-input", "3.0");
    click(root, "apply-calibration");
    await app.idle();

    const message = q(root, "message");
    expect(message.textContent).toContain("reference points coincide");
    expect(message.getAttribute("data-error-code")).toBe("degenerate_calibration");
    expect(q(root, "scale-factor").textContent).toContain("not calibrated");
  });

  it("requires two clicks and a positive distance before calling the API", async () => {
    const { app, mock, root } = await mountApp();
    const mutationsBefore = mock.mutations().length;
    app.setMode("calibrate");
    canvasClick(root, 10, 10);
    input(root, "distance-input", "3.0");
    click(root, "apply-calibration");
    await app.idle();
    expect(q(root, "message").textContent).toContain("two reference points");

    canvasClick(root, 200, 10);
    input(root, "distance-input", "-1");
    click(root, "apply-calibration");
    await app.idle();
    expect(q(root, "message").textContent).toContain("distance");
    expect(mock.mutations().length).toBe(mutationsBefore);
  });

  it("marks the trajectory stale after recalibration until re-track", async () => {
    const { app, root } = await mountTracked();
    expect(q(root, "stale").hidden).toBe(true);
    expect(q(root, "peak-speed").textContent).toContain("178.50");

    app.setMode("calibrate");
    canvasClick(root, 30, 250);
    canvasClick(root, 330, 250);
    input(root, "distance-input", "5.0");
    click(root, "apply-calibration");
    await app.idle();

    expect(q(root, "stale").hidden).toBe(false);
    expect(q(root, "stale").textContent).toContain("stale");
    expect(q(root, "peak-speed").textContent).toContain("stale");
    expect(q(root, "status").textContent).toContain("calibrated");

    click(root, "track");
    await app.idle();
    expect(q(root, "stale").hidden).toBe(true);
    expect(q(root, "peak-speed").textContent).toContain("178.50");
  });
});
