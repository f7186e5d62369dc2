// DOM rendering of the view-model. Bars are horizontal with CI whiskers;
// panel contents come exclusively from the view-model.

import type { ViewModel } from "./model.js";

export interface Handlers {
  onStep: (index: number) => void;
  onExit: () => void;
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderBars(vm: ViewModel): HTMLElement {
  const panel = el("section", "panel estimates");
  panel.appendChild(el("h2", undefined, "First-order estimates"));
  for (const bar of vm.bars) {
    const row = el("div", `bar-row ${bar.barClass}`);
    row.dataset.input = String(bar.input);
    const label = el("span", "bar-label", `${bar.name}`);
    label.title = `${bar.kind}`;
    const track = el("div", "bar-track");
    const zero = el("div", "bar-zero");
    zero.style.left = `${bar.zeroPct}%`;
    track.appendChild(zero);
    const fill = el("div", `bar-fill ${bar.barClass}`);
    fill.style.left = `${bar.barLeftPct}%`;
    fill.style.width = `${Math.max(bar.barWidthPct, 0.4)}%`;
    track.appendChild(fill);
    if (bar.whiskerLeftPct !== null && bar.whiskerWidthPct !== null) {
      const whisker = el("div", "bar-whisker");
      whisker.style.left = `${bar.whiskerLeftPct}%`;
      whisker.style.width = `${bar.whiskerWidthPct}%`;
      track.appendChild(whisker);
    }
    const value = el("span", "bar-value", bar.valueText);
    value.title = bar.ciText ?? "no interval";
    row.append(label, track, value, el("span", "bar-kind", bar.kind));
    if (bar.ciText) row.appendChild(el("span", "bar-ci", bar.ciText));
    if (bar.total) {
      const badge = el(
        "span",
        "total-badge",
        `S_T ${bar.total.value.toFixed(4)}`,
      );
      badge.title = `${bar.total.kind}${bar.total.ciText ? ", " + bar.total.ciText : ""}`;
      row.appendChild(badge);
    }
    panel.appendChild(row);
  }
  return panel;
}

function renderCandidates(vm: ViewModel, handlers: Handlers): HTMLElement {
  const panel = el("section", "panel candidates");
  panel.appendChild(el("h2", undefined, "Re-estimation candidates"));
  if (vm.candidates.length === 0) {
    panel.appendChild(el("p", "empty", "none left"));
  }
  for (const cand of vm.candidates) {
    const button = el("button", "candidate") as HTMLButtonElement;
    button.dataset.input = String(cand.input);
    button.textContent =
      `${cand.name}  (${cand.value.toFixed(4)}) -> ${cand.projectedTotal} runs`;
    button.disabled = vm.stepping || vm.closed;
    button.addEventListener("click", () => handlers.onStep(cand.input));
    panel.appendChild(button);
  }
  if (vm.stepping) panel.appendChild(el("p", "stepping", "stepping..."));
  return panel;
}

function renderBudget(vm: ViewModel): HTMLElement {
  const panel = el("section", "panel budget");
  panel.appendChild(el("h2", undefined, "Budget"));
  panel.appendChild(el("p", "budget-total", `consumed: ${vm.budget.total}`));
  panel.appendChild(el("p", undefined, `per step: +${vm.budget.stepCost}`));
  panel.appendChild(
    el("p", undefined, `all candidates: ${vm.budget.projectedIfAllCandidates}`),
  );
  panel.appendChild(
    el("p", undefined, `one-shot bound N(d+2): ${vm.budget.saltelliBound}`),
  );
  return panel;
}

function renderExit(vm: ViewModel, handlers: Handlers): HTMLElement {
  const panel = el("section", "panel exit");
  panel.appendChild(el("h2", undefined, "Exit"));
  const light = el(
    "p",
    `exit-indicator ${vm.exit.inBand ? "in-band" : "out-of-band"}`,
    `accounted sum ${vm.exit.sumText} (band 1 ± ${vm.exit.band})`,
  );
  panel.appendChild(light);
  if (vm.exit.halfWidthText) {
    panel.appendChild(el("p", undefined, `combined CI half-width ${vm.exit.halfWidthText}`));
  }
  panel.appendChild(
    el("p", undefined, vm.exit.suggestsExit ? "exit suggested" : "keep stepping"),
  );
  const button = el("button", "exit-button", vm.closed ? "closed" : "Exit campaign") as HTMLButtonElement;
  button.disabled = vm.closed || vm.stepping;
  button.addEventListener("click", () => {
    if (window.confirm("Close the campaign? No further steps will be possible.")) {
      handlers.onExit();
    }
  });
  panel.appendChild(button);
  return panel;
}

export function renderInto(root: HTMLElement, vm: ViewModel, handlers: Handlers): void {
  root.replaceChildren();
  const header = el("header");
  header.appendChild(el("h1", undefined, "sobolkit campaign console"));
  header.appendChild(
    el("p", "stage", `stage: ${vm.stage}, steps: ${vm.stepCount}`),
  );
  if (vm.notice) header.appendChild(el("p", "notice", vm.notice));
  root.appendChild(header);
  root.appendChild(renderBars(vm));
  const row = el("div", "panel-row");
  row.appendChild(renderCandidates(vm, handlers));
  row.appendChild(renderBudget(vm));
  row.appendChild(renderExit(vm, handlers));
  root.appendChild(row);
}
