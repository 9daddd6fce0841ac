/**
 * DOM wiring: user/preset selectors, weight sliders, live ranked list.
 */

import { fetchModel, fetchModels, fetchUsers, postRank } from "./api";
import { RankRequester } from "./requests";
import { displayedOrder, renderOfflineBanner, renderRankedList } from "./render";
import {
  FACTOR_NAMES,
  type FactorName,
  type WeightPanelState,
  anyFactorOn,
  applyPreset,
  defaultState,
  isPresetable,
  setSlider,
  switchOffAdditional,
  toWeights,
  toggleFactor,
} from "./weights";
import type { RankResponse } from "./types";

const FACTOR_LABELS: Record<FactorName, string> = {
  thi: "theme interest",
  tyi: "type interest",
  rat: "community rating",
  rch: "reachability",
  frn: "friends going",
};

interface AppState {
  panel: WeightPanelState;
  userId: string | null;
  lastResponse: RankResponse | null;
  displayedOrderIds: string[];
  stale: boolean;
  offline: boolean;
}

const state: AppState = {
  panel: defaultState(),
  userId: null,
  lastResponse: null,
  displayedOrderIds: [],
  stale: false,
  offline: false,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const requester = new RankRequester(postRank, {
  onResult(response) {
    state.lastResponse = response;
    state.displayedOrderIds = displayedOrder(response);
    state.stale = false;
    state.offline = false;
    paintList();
  },
  onError() {
    state.offline = true;
    state.stale = state.lastResponse !== null;
    paintList();
  },
  onPending() {
    if (!state.stale && state.lastResponse !== null) {
      state.stale = true;
      paintList();
    }
  },
});

function paintList(): void {
  el("banner").innerHTML = renderOfflineBanner(state.offline);
  const target = el("ranking");
  if (state.lastResponse === null) {
    target.innerHTML = `<p class="hint">pick a user to rank events</p>`;
    return;
  }
  target.innerHTML = renderRankedList(state.lastResponse, state.stale);
}

function paintPanel(): void {
  for (const name of FACTOR_NAMES) {
    const slider = el<HTMLInputElement>(`slider-${name}`);
    const toggle = el<HTMLInputElement>(`toggle-${name}`);
    const value = el(`value-${name}`);
    slider.value = String(state.panel.sliders[name]);
    slider.disabled = !state.panel.enabled[name];
    toggle.checked = state.panel.enabled[name];
    value.textContent = state.panel.enabled[name]
      ? state.panel.sliders[name].toFixed(2)
      : "off";
  }
  el("intercept-value").textContent = state.panel.intercept.toFixed(4);
}

function requestRank(immediate = false): void {
  if (state.userId === null || !anyFactorOn(state.panel)) {
    return;
  }
  const body = {
    user_id: state.userId,
    weights: toWeights(state.panel),
    intercept: state.panel.intercept,
  };
  if (immediate) {
    void requester.issue(body);
  } else {
    requester.schedule(body);
  }
}

function buildPanelControls(): void {
  const container = el("factors");
  container.innerHTML = FACTOR_NAMES.map(
    (name) => `
    <div class="factor-row">
      <input type="checkbox" id="toggle-${name}" checked>
      <label for="slider-${name}">${FACTOR_LABELS[name]}</label>
      <input type="range" id="slider-${name}" min="0" max="1" step="0.01">
      <span class="value" id="value-${name}"></span>
    </div>`,
  ).join("");
  for (const name of FACTOR_NAMES) {
    el<HTMLInputElement>(`slider-${name}`).addEventListener("input", (event) => {
      const position = Number((event.target as HTMLInputElement).value);
      state.panel = setSlider(state.panel, name, position);
      paintPanel();
      requestRank();
    });
    el<HTMLInputElement>(`toggle-${name}`).addEventListener("change", (event) => {
      const on = (event.target as HTMLInputElement).checked;
      state.panel = toggleFactor(state.panel, name, on);
      paintPanel();
      requestRank();
    });
  }
  el("additional-off").addEventListener("click", () => {
    state.panel = switchOffAdditional(state.panel);
    paintPanel();
    requestRank(true);
  });
}

async function boot(): Promise<void> {
  buildPanelControls();
  paintPanel();
  paintList();

  const users = await fetchUsers();
  const userSelect = el<HTMLSelectElement>("user-select");
  userSelect.innerHTML =
    `<option value="">choose…</option>` +
    users
      .map((user) => `<option value="${user.user_id}">${user.user_id}</option>`)
      .join("");
  userSelect.addEventListener("change", () => {
    state.userId = userSelect.value || null;
    requestRank(true);
  });

  // only plain functions over the five slider factors can act as presets
  const summaries = (await fetchModels()).filter((model) => !model.piecewise);
  const details = await Promise.all(summaries.map((m) => fetchModel(m.id)));
  const presets = details.filter((detail) => isPresetable(detail.function));
  const presetSelect = el<HTMLSelectElement>("preset-select");
  presetSelect.innerHTML =
    `<option value="">custom</option>` +
    presets
      .map((detail) => `<option value="${detail.id}">${detail.id}</option>`)
      .join("");
  presetSelect.addEventListener("change", () => {
    const detail = presets.find((p) => p.id === presetSelect.value);
    if (!detail) {
      return;
    }
    state.panel = applyPreset(state.panel, detail.id, detail.function);
    paintPanel();
    requestRank(true);
  });
}

void boot().catch(() => {
  state.offline = true;
  paintList();
});
