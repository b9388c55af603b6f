// End to end: real index, real Python server, real fetch; only the DOM is simulated.
import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import net from "node:net";
import os from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { initApp } from "../src/main.js";
import { loadPage, settle, submitForm } from "./page.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const repoRoot = path.resolve(here, "../..");
const npmTrace = readFileSync(
  path.join(repoRoot, "tests/fixtures/npm_stacktrace.txt"),
  "utf-8",
);

let workDir: string;
let server: ChildProcess | undefined;
let baseUrl: string;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const { port } = probe.address() as net.AddressInfo;
      probe.close(() => resolve(port));
    });
  });
}

async function waitForHealthy(url: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${url}/healthz`);
      if (resp.ok && (await resp.json()).index_loaded) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("backend never became healthy");
}

beforeAll(async () => {
  workDir = mkdtempSync(path.join(os.tmpdir(), "stacksearch-e2e-"));
  const py = (args: string[]) =>
    execFileSync("python3", args, { cwd: repoRoot, stdio: ["ignore", "pipe", "inherit"] });

  py(["tests/fixture_gen.py", workDir]);
  py([
    "-m",
    "stacksearch.cli",
    "convert",
    path.join(workDir, "paper_posts.xml"),
    path.join(workDir, "rows.jsonl"),
  ]);
  py([
    "-m",
    "stacksearch.cli",
    "build",
    path.join(workDir, "rows.jsonl"),
    path.join(workDir, "idx"),
  ]);

  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    ["-m", "stacksearch.cli", "serve", path.join(workDir, "idx"), "--bind", `127.0.0.1:${port}`],
    { cwd: repoRoot, stdio: ["ignore", "ignore", "inherit"] },
  );
  // The bundle is served same-origin in production; mirror that here so
  // happy-dom's same-origin policy lets fetch through.
  (window as unknown as { happyDOM: { setURL(url: string): void } }).happyDOM.setURL(baseUrl);
  await waitForHealthy(baseUrl, 30_000);
}, 120_000);

afterAll(() => {
  server?.kill("SIGTERM");
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

describe("pasting the npm stacktrace against the served fixture index", () => {
  it("renders linked cards with similarity percentages and summaries", async () => {
    loadPage();
    initApp(document, baseUrl);

    // Browsers pick up the selected attribute (k=3); happy-dom does not.
    (document.getElementById("k-select") as HTMLSelectElement).value = "3";
    (document.getElementById("stacktrace") as HTMLTextAreaElement).value = npmTrace;
    submitForm();

    const deadline = Date.now() + 30_000;
    while (document.querySelectorAll("#results .card").length === 0) {
      if (Date.now() > deadline) throw new Error("no cards rendered");
      await settle();
    }

    const cards = [...document.querySelectorAll("#results .card")];
    expect(cards.length).toBeGreaterThanOrEqual(2);

    const hrefs = cards.map((card) => card.querySelector("a")!.getAttribute("href"));
    expect(hrefs).toContain("https://stackoverflow.com/q/26136411");
    expect(hrefs).toContain("https://stackoverflow.com/q/12913141");

    for (const card of cards) {
      expect(card.querySelector(".similarity")!.textContent).toMatch(/^\d+\.\d%$/);
      const summary = card.querySelector("details.summary p");
      expect(summary?.textContent?.length).toBeGreaterThan(0);
      expect(card.querySelector("a")!.getAttribute("target")).toBe("_blank");
    }

    const status = document.getElementById("status")!;
    expect(status.hidden).toBe(false);
    expect(status.textContent).toMatch(/\d+\/\d+ query tokens known/);
  }, 60_000);

  it("performs no network call on empty input", async () => {
    loadPage();
    initApp(document, baseUrl);

    const fetchSpy = vi.fn();
    vi.stubGlobal("fetch", fetchSpy);
    try {
      (document.getElementById("stacktrace") as HTMLTextAreaElement).value = "";
      submitForm();
      await settle();
      expect(fetchSpy).not.toHaveBeenCalled();
      expect(document.getElementById("validation")!.hidden).toBe(false);
    } finally {
      vi.unstubAllGlobals();
    }
  });
});
