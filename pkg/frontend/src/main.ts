import { ApiClient } from "./api.js";
import { SessionApp } from "./app.js";

const apiBase =
  document.querySelector('meta[name="api-base"]')?.getAttribute("content") ?? "";

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app container");
}

const app = new SessionApp({
  root,
  api: new ApiClient(apiBase, (url, init) => fetch(url, init)),
});

// Stream upload: one .jsonl detection stream starts a session.
const streamInput = document.getElementById("stream-input") as HTMLInputElement;
streamInput.addEventListener("change", () => {
  const file = streamInput.files?.[0];
  if (!file) {
    return;
  }
  file.text().then((text) => app.open(text));
});

// Optional extracted frame images named like frame_0012.png; the trailing
// number is the frame index. Without them the overlay runs schematic-only.
const framesInput = document.getElementById("frames-input") as HTMLInputElement;
framesInput.addEventListener("change", () => {
  for (const file of Array.from(framesInput.files ?? [])) {
    const match = /(\d+)\.[a-z]+$/i.exec(file.name);
    if (!match) {
      continue;
    }
    const frameIndex = parseInt(match[1], 10);
    const url = URL.createObjectURL(file);
    const image = new Image();
    image.onload = () => app.setBackdrop(frameIndex, image);
    image.src = url;
  }
});
