import { ApiError, search } from "./api.js";
import { renderResults } from "./render.js";

export function initApp(doc: Document, apiBase = ""): void {
  const form = doc.getElementById("search-form") as HTMLFormElement;
  const textarea = doc.getElementById("stacktrace") as HTMLTextAreaElement;
  const kSelect = doc.getElementById("k-select") as HTMLSelectElement;
  const button = doc.getElementById("submit") as HTMLButtonElement;
  const validation = doc.getElementById("validation") as HTMLElement;
  const banner = doc.getElementById("banner") as HTMLElement;
  const status = doc.getElementById("status") as HTMLElement;
  const results = doc.getElementById("results") as HTMLElement;

  let inFlight = false;

  async function run(): Promise<void> {
    if (inFlight) return;
    banner.hidden = true;

    const stacktrace = textarea.value.trim();
    if (!stacktrace) {
      validation.textContent = "Paste a stacktrace first; the box is empty.";
      validation.hidden = false;
      return;
    }
    validation.hidden = true;

    inFlight = true;
    button.disabled = true;
    try {
      const payload = await search(stacktrace, parseInt(kSelect.value, 10), apiBase);
      renderResults(doc, results, payload);
      status.textContent =
        `${payload.results.length} result(s) in ${payload.elapsed_ms.toFixed(1)} ms server time · ` +
        `${payload.query_tokens_known}/${payload.query_tokens_total} query tokens known to the index`;
      status.hidden = false;
    } catch (err) {
      status.hidden = true;
      banner.textContent =
        err instanceof ApiError
          ? `Search failed: the server answered ${err.message}.`
          : "Search failed: the server could not be reached.";
      banner.hidden = false;
    } finally {
      inFlight = false;
      button.disabled = false;
    }
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void run();
  });
}
