/**
 * Payload types for the /api/v1 JSON interface.
 */

export interface EventSummary {
  event_id: string;
  themes: string[];
  types: string[];
  avg_rating: number | null;
  friends_count: number | null;
  dist_km?: number;
}

export interface UserSummary {
  user_id: string;
  mov_km: number;
  has_self_weights: boolean;
}

export interface FunctionPayload {
  intercept: number | null;
  coefficients: Record<string, number> | null;
  pieces: unknown | null;
}

export interface ModelSummary {
  id: string;
  regime: string | null;
  source: string;
  piecewise: boolean;
}

export interface ModelDetail {
  id: string;
  regime: string | null;
  source: string;
  function: FunctionPayload;
}

export interface RankedResult {
  event_id: string;
  score?: number;
  factors?: Record<string, number>;
  contributions?: Record<string, number>;
  intercept?: number;
  error?: string;
}

export interface RankResponse {
  user_id: string;
  weights: Record<string, number>;
  intercept: number;
  results: RankedResult[];
}

export interface RankRequestBody {
  user_id: string;
  weights: Record<string, number>;
  intercept: number;
}
