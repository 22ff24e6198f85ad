import { ApiClient } from "../src/api.js";
import { SessionApp } from "../src/app.js";
import { MockV1Server } from "./mock_api.js";
import { RecordingContext } from "./recording_context.js";

export interface Mounted {
  app: SessionApp;
  mock: MockV1Server;
  ctx: RecordingContext;
  root: HTMLElement;
}

// Canvas is 960x540 against the demo stream's 1920x1080, so canvas
// coordinates map to video coordinates at exactly 2x.
export const VIDEO_TO_CANVAS = 0.5;

export async function mountApp(): Promise<Mounted> {
  const mock = new MockV1Server();
  const ctx = new RecordingContext();
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new SessionApp({
    root,
    api: new ApiClient("", mock.fetchFn),
    contextFor: () => ctx,
  });
  await app.open("stub detection stream\n");
  return { app, mock, ctx, root };
}

/** Mount, calibrate with the demo reference points, and run tracking. */
export async function mountTracked(): Promise<Mounted> {
  const mounted = await mountApp();
  const { app, root } = mounted;
  app.setMode("calibrate");
  canvasClick(root, 30, 250); // video (60, 500)
  canvasClick(root, 330, 250); // video (660, 500)
  input(root, "distance-input", "5.0");
  click(root, "apply-calibration");
  await app.idle();
  click(root, "track");
  await app.idle();
  app.setMode("review");
  return mounted;
}

export function q(root: HTMLElement, role: string): HTMLElement {
  const node = root.querySelector(`[data-role="${role}"]`);
  if (node === null) {
    throw new Error(`no element with data-role=${role}`);
  }
  return node as HTMLElement;
}

export function click(root: HTMLElement, role: string): void {
  q(root, role).dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

export function input(root: HTMLElement, role: string, value: string): void {
  (q(root, role) as HTMLInputElement).value = value;
}

/** Press-release on the canvas at canvas-pixel coordinates. */
export function canvasClick(root: HTMLElement, x: number, y: number): void {
  const canvas = q(root, "frame-canvas");
  canvas.dispatchEvent(new MouseEvent("mousedown", { clientX: x, clientY: y }));
  canvas.dispatchEvent(new MouseEvent("mouseup", { clientX: x, clientY: y }));
}

export function canvasDrag(
  root: HTMLElement,
  from: [number, number],
  to: [number, number],
): void {
  const canvas = q(root, "frame-canvas");
  canvas.dispatchEvent(new MouseEvent("mousedown", { clientX: from[0], clientY: from[1] }));
  canvas.dispatchEvent(new MouseEvent("mousemove", { clientX: to[0], clientY: to[1] }));
  canvas.dispatchEvent(new MouseEvent("mouseup", { clientX: to[0], clientY: to[1] }));
}
