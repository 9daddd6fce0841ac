/**
 * Pure rendering: rank responses in, HTML strings out.
 *
 * The list order is always the server's; nothing here sorts. Each card shows
 * the score as a bar plus a stacked breakdown of per-factor contributions
 * (and the intercept), which together add up to the displayed score.
 */

import type { RankResponse, RankedResult } from "./types";

const FACTOR_COLORS: Record<string, string> = {
  thi: "#4c78a8",
  tyi: "#72b7b2",
  rat: "#eeca3b",
  rch: "#f58518",
  frn: "#e45756",
  intercept: "#9d9d9d",
};

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** The order the UI displays: exactly the server's response order. */
export function displayedOrder(response: RankResponse): string[] {
  return response.results.map((result) => result.event_id);
}

export interface Segment {
  name: string;
  value: number;
  /** Width in percent of the card's bar area. */
  width: number;
}

/**
 * Stacked-bar segments for one scored card: each factor's contribution plus
 * the intercept, widths scaled by total absolute contribution.
 */
export function contributionSegments(result: RankedResult): Segment[] {
  if (result.contributions === undefined || result.intercept === undefined) {
    return [];
  }
  const parts: Array<[string, number]> = Object.entries(result.contributions);
  parts.push(["intercept", result.intercept]);
  const totalAbs = parts.reduce((acc, [, value]) => acc + Math.abs(value), 0);
  return parts.map(([name, value]) => ({
    name,
    value,
    width: totalAbs > 0 ? (Math.abs(value) / totalAbs) * 100 : 0,
  }));
}

function scoreBarWidth(score: number, maxScore: number): number {
  if (maxScore <= 0) {
    return 0;
  }
  return Math.min(100, Math.max(0, (score / maxScore) * 100));
}

function renderCard(result: RankedResult, position: number,
                    maxScore: number): string {
  if (result.error !== undefined) {
    return (
      `<li class="card card-error" data-event="${escapeHtml(result.event_id)}">` +
      `<span class="pos">${position}</span>` +
      `<span class="event-id">${escapeHtml(result.event_id)}</span>` +
      `<span class="error">${escapeHtml(result.error)}</span></li>`
    );
  }
  const score = result.score as number;
  const segments = contributionSegments(result)
    .map((segment) => {
      const color = FACTOR_COLORS[segment.name] ?? "#ccc";
      const sign = segment.value < 0 ? " negative" : "";
      return (
        `<span class="segment${sign}" title="${segment.name}: ` +
        `${segment.value.toFixed(3)}" style="width:${segment.width.toFixed(2)}%;` +
        `background:${color}"></span>`
      );
    })
    .join("");
  return (
    `<li class="card" data-event="${escapeHtml(result.event_id)}">` +
    `<span class="pos">${position}</span>` +
    `<span class="event-id">${escapeHtml(result.event_id)}</span>` +
    `<span class="score">${score.toFixed(3)}</span>` +
    `<span class="score-bar"><span class="fill" ` +
    `style="width:${scoreBarWidth(score, maxScore).toFixed(2)}%"></span></span>` +
    `<span class="breakdown">${segments}</span></li>`
  );
}

export function renderRankedList(response: RankResponse, stale = false): string {
  const scores = response.results
    .filter((result) => result.error === undefined)
    .map((result) => result.score as number);
  const maxScore = scores.length > 0 ? Math.max(...scores, 1e-9) : 0;
  const cards = response.results
    .map((result, index) => renderCard(result, index + 1, maxScore))
    .join("\n");
  const staleClass = stale ? " stale" : "";
  const staleBadge = stale ? `<div class="stale-badge">updating…</div>` : "";
  return `<div class="ranked${staleClass}">${staleBadge}<ol class="cards">\n${cards}\n</ol></div>`;
}

export function renderOfflineBanner(visible: boolean): string {
  return visible
    ? `<div class="banner offline">service unreachable — showing the last ranking</div>`
    : "";
}
