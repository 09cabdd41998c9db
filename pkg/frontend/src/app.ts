// DOM glue for the move explorer. One session per tab; every action
// round-trips through the service and re-renders from the returned state.

import { ApiClient, MoveDescriptor } from "./api.js";
import { ViewModel } from "./model.js";
import { renderSvg } from "./render.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8137";

const model = new ViewModel(new ApiClient(SERVICE_URL));

const el = {
  input: document.getElementById("input") as HTMLTextAreaElement,
  mode: document.getElementById("mode") as HTMLSelectElement,
  load: document.getElementById("load") as HTMLButtonElement,
  undo: document.getElementById("undo") as HTMLButtonElement,
  coef: document.getElementById("coef") as HTMLInputElement,
  palette: document.getElementById("palette")!,
  canvas: document.getElementById("canvas")!,
  badge: document.getElementById("badge")!,
  history: document.getElementById("history")!,
  error: document.getElementById("error")!,
  dotToggle: document.getElementById("dot-toggle") as HTMLButtonElement,
  dotView: document.getElementById("dot-view") as HTMLPreElement,
};

let hovered: string | null = null;

function renderGraph(): void {
  if (!model.state) {
    el.canvas.innerHTML = "";
    return;
  }
  const highlight = hovered ? model.highlightFor(hovered) : undefined;
  el.canvas.innerHTML = renderSvg(model.state.graph, highlight);
}

function renderPalette(): void {
  el.palette.innerHTML = "";
  for (const group of model.paletteGroups()) {
    const heading = document.createElement("div");
    heading.className = "palette-group";
    heading.textContent = `${group.title} (${group.entries.length})`;
    el.palette.appendChild(heading);
    for (const entry of group.entries) {
      el.palette.appendChild(paletteButton(entry));
    }
  }
}

function paletteButton(entry: MoveDescriptor): HTMLButtonElement {
  const button = document.createElement("button");
  button.className = "palette-entry";
  button.textContent = entry.label;
  button.title = entry.fingerprint;
  button.addEventListener("mouseenter", () => {
    hovered = entry.fingerprint;
    renderGraph();
  });
  button.addEventListener("mouseleave", () => {
    hovered = null;
    renderGraph();
  });
  button.addEventListener("click", async () => {
    const coef = el.coef.value.trim() || undefined;
    await model.applySelected(entry, coef);
    hovered = null;
    renderAll();
  });
  return button;
}

function renderAll(): void {
  el.error.textContent = model.error ?? "";
  el.error.style.display = model.error ? "block" : "none";
  el.badge.textContent = model.loaded ? `canonical key ${model.badge}` : "";
  el.undo.disabled = !model.canUndo;
  el.history.innerHTML = "";
  model.history.forEach((entry, i) => {
    const chip = document.createElement("span");
    chip.className = "history-chip";
    chip.textContent = `${i + 1}. ${entry.label}`;
    el.history.appendChild(chip);
  });
  renderPalette();
  renderGraph();
}

el.load.addEventListener("click", async () => {
  await model.load(el.input.value, el.mode.value as "term" | "glc" | "auto");
  renderAll();
});

el.undo.addEventListener("click", async () => {
  await model.undo();
  renderAll();
});

el.dotToggle.addEventListener("click", async () => {
  if (el.dotView.style.display === "block") {
    el.dotView.style.display = "none";
    return;
  }
  el.dotView.textContent = await model.dotText();
  el.dotView.style.display = "block";
});

renderAll();
