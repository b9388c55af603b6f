import type { ResultPayload, SearchResponse } from "./types.js";

export function formatSimilarity(similarity: number): string {
  return `${(similarity * 100).toFixed(1)}%`;
}

export function titleFor(result: ResultPayload): string {
  return result.title ?? `(untitled question #${result.question_id})`;
}

export function buildCard(doc: Document, result: ResultPayload): HTMLElement {
  const card = doc.createElement("article");
  card.className = "card";

  const header = doc.createElement("header");
  const link = doc.createElement("a");
  link.href = result.url;
  link.target = "_blank";
  link.rel = "noopener";
  link.textContent = titleFor(result);
  const badge = doc.createElement("span");
  badge.className = "similarity";
  badge.textContent = formatSimilarity(result.similarity);
  header.append(link, badge);
  card.append(header);

  const meta = doc.createElement("p");
  meta.className = "meta";
  if (result.has_accepted_answer) {
    const accepted = doc.createElement("span");
    accepted.className = "accepted";
    accepted.textContent = "accepted answer";
    meta.append(accepted);
  }
  if (result.view_count !== null) {
    const views = doc.createElement("span");
    views.textContent = `${result.view_count.toLocaleString("en-US")} views`;
    meta.append(views);
  }
  if (result.score !== null) {
    const score = doc.createElement("span");
    score.textContent = `score ${result.score}`;
    meta.append(score);
  }
  if (meta.childNodes.length > 0) card.append(meta);

  if (result.summary) {
    const details = doc.createElement("details");
    details.className = "summary";
    const toggle = doc.createElement("summary");
    toggle.textContent = "Question summary";
    const text = doc.createElement("p");
    text.textContent = result.summary;
    details.append(toggle, text);
    card.append(details);
  }
  return card;
}

export function renderResults(
  doc: Document,
  container: HTMLElement,
  payload: SearchResponse,
): void {
  container.replaceChildren();
  if (payload.reason === "no_known_terms") {
    const empty = doc.createElement("p");
    empty.className = "empty";
    empty.textContent =
      "No part of that stacktrace appears in the indexed corpus, so nothing can match. " +
      "Try pasting more of the original error output.";
    container.append(empty);
    return;
  }
  if (payload.results.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty";
    empty.textContent = "No matching threads found.";
    container.append(empty);
    return;
  }
  // Server order is authoritative; the client never re-sorts.
  for (const result of payload.results) {
    container.append(buildCard(doc, result));
  }
}
