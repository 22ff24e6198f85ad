import { readdirSync, readFileSync } from "node:fs";
import { join, resolve } from "node:path";
import { describe, expect, it } from "vitest";

// vitest runs with the package root as cwd; the build step precedes tests
const distDir = resolve(process.cwd(), "dist");

function bundleText(): string {
  const files = readdirSync(distDir).filter((name) => name.endsWith(".js"));
  expect(files.sort()).toEqual(["api.js", "app.js", "main.js", "overlay.js", "types.js"]);
  return files.map((name) => readFileSync(join(distDir, name), "utf-8")).join("\n");
}

describe("compiled bundle", () => {
  it("contains no speed-formula numerics", () => {
    const text = bundleText();
    // Every speed, score, and scale factor is a server value; the client
    // must not carry the machinery to recompute them.
    for (const forbidden of ["Math.sqrt", "Math.hypot", "Math.pow", "Math.cbrt", "3.6"]) {
      expect(text.includes(forbidden), `bundle must not contain ${forbidden}`).toBe(false);
    }
  });

  it("talks to the versioned API prefix only", () => {
    const text = bundleText();
    const fetchPaths = text.match(/\/v\d+\/[a-z]+/g) ?? [];
    expect(fetchPaths.length).toBeGreaterThan(0);
    for (const path of fetchPaths) {
      expect(path.startsWith("/v1/")).toBe(true);
    }
  });
});
