import type { Span } from "./types";

/**
 * Render span JSON into DOM nodes.
 *
 * Span offsets are Unicode code-point indices (not UTF-16 code units),
 * so the text is sliced over code points; the rendered glyph sequence
 * must equal the span-JSON character content exactly — no reordering,
 * insertion, or loss.
 */
export function renderSpans(
  text: string,
  spans: Span[],
  doc: Document = document,
): HTMLElement {
  const codePoints = Array.from(text);
  const root = doc.createElement("div");
  root.className = "sl-text";
  for (const span of spans) {
    const el = doc.createElement("span");
    el.textContent = codePoints.slice(span.start, span.end).join("");
    if (span.weight === "bold") {
      el.style.fontWeight = "bold";
    }
    if (span.color !== "#000000") {
      el.style.color = span.color;
    }
    root.appendChild(el);
  }
  return root;
}

/** The character content a span list covers, for integrity checks. */
export function spanText(text: string, spans: Span[]): string {
  const codePoints = Array.from(text);
  return spans
    .map((span) => codePoints.slice(span.start, span.end).join(""))
    .join("");
}
