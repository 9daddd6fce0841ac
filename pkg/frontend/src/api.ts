/**
 * Thin client for the /api/v1 JSON interface.
 */

import type {
  EventSummary,
  ModelDetail,
  ModelSummary,
  RankRequestBody,
  RankResponse,
  UserSummary,
} from "./types";

const BASE = "/api/v1";

async function getJson<T>(path: string): Promise<T> {
  const response = await fetch(`${BASE}${path}`);
  if (!response.ok) {
    throw new Error(`GET ${path}: ${response.status}`);
  }
  return (await response.json()) as T;
}

export async function fetchEvents(): Promise<EventSummary[]> {
  return (await getJson<{ events: EventSummary[] }>("/events")).events;
}

export async function fetchUsers(): Promise<UserSummary[]> {
  return (await getJson<{ users: UserSummary[] }>("/users")).users;
}

export async function fetchModels(): Promise<ModelSummary[]> {
  return (await getJson<{ models: ModelSummary[] }>("/models")).models;
}

export async function fetchModel(id: string): Promise<ModelDetail> {
  return getJson<ModelDetail>(`/models/${id}`);
}

export async function postRank(body: RankRequestBody): Promise<RankResponse> {
  const response = await fetch(`${BASE}/rank`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) {
    throw new Error(`POST /rank: ${response.status}`);
  }
  return (await response.json()) as RankResponse;
}
