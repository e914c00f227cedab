import { ApiClient } from "./api";
import { renderSpans } from "./render";
import { wallClock } from "./session";
import type { ItemView, Session } from "./types";

/**
 * Browser wiring: one linear screen flow per item with no
 * back-navigation.  Start form -> reading screen (text not selectable)
 * -> question screen (MCQ + keyword grid + difficulty) -> next item.
 */

const clock = wallClock();

interface UiState {
  client: ApiClient;
  session: Session;
  item: ItemView | null;
  shownAt: number;
  openedAt: number;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function screen(...children: (Node | string)[]): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  root.replaceChildren(...children);
}

function startScreen(): void {
  const input = el("input", { placeholder: "participant id", id: "pid" });
  const button = el("button", {}, "Start session");
  button.addEventListener("click", async () => {
    const pid = input.value.trim();
    if (!pid) return;
    const client = new ApiClient("");
    const session = await client.createSession(pid);
    await nextScreen({ client, session, item: null, shownAt: 0, openedAt: 0 });
  });
  screen(el("h1", {}, "Reading session"), input, button);
}

async function nextScreen(state: UiState): Promise<void> {
  const next = await state.client.nextItem(state.session.session_id);
  if (next.done) {
    screen(el("h1", {}, "Session complete"), el("p", {}, "Thank you."));
    return;
  }
  state.item = next;
  readingScreen(state);
}

function readingScreen(state: UiState): void {
  const item = state.item!;
  const textNode = renderSpans(item.text, item.spans);
  textNode.style.userSelect = "none"; // discourage answer lookup by copy
  const button = el("button", {}, "Show questions");
  button.addEventListener("click", () => {
    state.openedAt = clock.now();
    questionScreen(state);
  });
  state.shownAt = clock.now();
  screen(
    el("h2", {}, `Text ${item.position} of ${state.session.items.length}`),
    textNode,
    button,
  );
}

function questionScreen(state: UiState): void {
  const item = state.item!;
  const form = el("form", {});
  item.questions.forEach((question, qi) => {
    const block = el("fieldset", {}, el("legend", {}, question.prompt));
    question.options.forEach((option, oi) => {
      const radio = el("input", {
        type: "radio",
        name: `q${qi}`,
        value: String(oi),
        required: "required",
      });
      block.append(el("label", {}, radio, option));
    });
    form.append(block);
  });
  const keywordBlock = el("fieldset", {}, el("legend", {}, "Select keywords"));
  item.keywords.forEach((keyword) => {
    const box = el("input", { type: "checkbox", name: "kw", value: keyword });
    keywordBlock.append(el("label", {}, box, keyword));
  });
  form.append(keywordBlock);
  const difficultyBlock = el(
    "fieldset",
    {},
    el("legend", {}, "How difficult was this text? (1 easy - 5 hard)"),
  );
  for (let rating = 1; rating <= 5; rating += 1) {
    const radio = el("input", {
      type: "radio",
      name: "difficulty",
      value: String(rating),
      required: "required",
    });
    difficultyBlock.append(el("label", {}, radio, String(rating)));
  }
  form.append(difficultyBlock);
  const button = el("button", { type: "submit" }, "Submit");
  form.append(button);
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const mcq = item.questions.map((_, qi) => Number(data.get(`q${qi}`)));
    const keywords = data.getAll("kw").map(String);
    const difficulty = Number(data.get("difficulty"));
    await state.client.submit(state.session.session_id, {
      index: item.index,
      mcq,
      keywords,
      difficulty,
      text_shown_at: state.shownAt,
      answers_opened_at: state.openedAt,
      answers_submitted_at: clock.now(),
    });
    await nextScreen(state);
  });
  screen(el("h2", {}, "Questions"), form);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startScreen();
}
