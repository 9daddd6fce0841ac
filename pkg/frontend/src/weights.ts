/**
 * Weight-panel state: per-factor sliders and on/off toggles.
 *
 * Sliders display a normalized [0,1] position; requests carry
 * coefficient-scale values. A factor that is switched off is simply absent
 * from the request weights, matching the server's "dropped" semantics.
 */

import type { FunctionPayload } from "./types";

export const FACTOR_NAMES = ["thi", "tyi", "rat", "rch", "frn"] as const;
export type FactorName = (typeof FACTOR_NAMES)[number];

/** Content factors stay on in the "additional factors off" view. */
export const CONTENT_FACTORS: FactorName[] = ["thi", "tyi"];
export const ADDITIONAL_FACTORS: FactorName[] = ["rat", "rch", "frn"];

/** Slider position 1.0 corresponds to this coefficient value. */
export const COEFFICIENT_SCALE = 1.0;

export interface WeightPanelState {
  sliders: Record<FactorName, number>;
  enabled: Record<FactorName, boolean>;
  intercept: number;
  presetId: string | null;
}

export function defaultState(): WeightPanelState {
  return {
    sliders: { thi: 0.5, tyi: 0.3, rat: 0.1, rch: 0.2, frn: 0.1 },
    enabled: { thi: true, tyi: true, rat: true, rch: true, frn: true },
    intercept: 0,
    presetId: null,
  };
}

function clamp01(value: number): number {
  return Math.min(1, Math.max(0, value));
}

export function coefficientFromSlider(position: number): number {
  return clamp01(position) * COEFFICIENT_SCALE;
}

export function sliderFromCoefficient(coefficient: number): number {
  return clamp01(coefficient / COEFFICIENT_SCALE);
}

export function setSlider(
  state: WeightPanelState,
  name: FactorName,
  position: number,
): WeightPanelState {
  return {
    ...state,
    sliders: { ...state.sliders, [name]: clamp01(position) },
    presetId: null,
  };
}

export function toggleFactor(
  state: WeightPanelState,
  name: FactorName,
  on: boolean,
): WeightPanelState {
  return {
    ...state,
    enabled: { ...state.enabled, [name]: on },
    presetId: null,
  };
}

export function anyFactorOn(state: WeightPanelState): boolean {
  return FACTOR_NAMES.some((name) => state.enabled[name]);
}

/**
 * Request weights for the current panel: enabled factors only, on the
 * coefficient scale. Callers must not issue a rank request with every
 * factor off; this throws to enforce that invariant.
 */
export function toWeights(state: WeightPanelState): Record<string, number> {
  if (!anyFactorOn(state)) {
    throw new Error("at least one factor must be on");
  }
  const weights: Record<string, number> = {};
  for (const name of FACTOR_NAMES) {
    if (state.enabled[name]) {
      weights[name] = coefficientFromSlider(state.sliders[name]);
    }
  }
  return weights;
}

/** A model is usable as a preset if it is a plain (non-piecewise) function
 * over the five slider factors. */
export function isPresetable(fn: FunctionPayload): boolean {
  if (fn.pieces || fn.coefficients == null || fn.intercept == null) {
    return false;
  }
  return Object.keys(fn.coefficients).every((name) =>
    (FACTOR_NAMES as readonly string[]).includes(name),
  );
}

/**
 * Load a learned function into the panel: present coefficients set slider
 * positions, absent ones switch the factor off.
 */
export function applyPreset(
  state: WeightPanelState,
  presetId: string,
  fn: FunctionPayload,
): WeightPanelState {
  if (!isPresetable(fn)) {
    throw new Error(`model ${presetId} cannot drive the weight sliders`);
  }
  const coefficients = fn.coefficients as Record<string, number>;
  const sliders = { ...state.sliders };
  const enabled = { ...state.enabled };
  for (const name of FACTOR_NAMES) {
    const coefficient = coefficients[name];
    if (coefficient === undefined) {
      enabled[name] = false;
    } else {
      enabled[name] = true;
      sliders[name] = sliderFromCoefficient(coefficient);
    }
  }
  return { sliders, enabled, intercept: fn.intercept as number, presetId };
}

/** The content-only what-if view: rating, reachability, friends all off. */
export function switchOffAdditional(state: WeightPanelState): WeightPanelState {
  const enabled = { ...state.enabled };
  for (const name of ADDITIONAL_FACTORS) {
    enabled[name] = false;
  }
  return { ...state, enabled, presetId: null };
}
