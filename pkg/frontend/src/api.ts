/** Thin client for the two service endpoints this UI is allowed to call. */

import type { Ratings, SessionResponse } from './types.js'

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message)
    this.name = 'ApiError'
  }
}

export interface ApiClient {
  createSession(text: string): Promise<SessionResponse>
  sendFeedback(ratings: Ratings): Promise<void>
}

async function post(fetchFn: typeof fetch, url: string, body: unknown): Promise<Response> {
  const response = await fetchFn(url, {
    method: 'POST',
    headers: { 'content-type': 'application/json' },
    body: JSON.stringify(body),
  })
  if (!response.ok) {
    throw new ApiError(response.status, `${url} responded ${response.status}`)
  }
  return response
}

export function makeApiClient(baseUrl = '', fetchFn: typeof fetch = fetch): ApiClient {
  return {
    async createSession(text: string): Promise<SessionResponse> {
      const response = await post(fetchFn, `${baseUrl}/api/session`, { text })
      return (await response.json()) as SessionResponse
    },
    async sendFeedback(ratings: Ratings): Promise<void> {
      await post(fetchFn, `${baseUrl}/api/feedback`, ratings)
    },
  }
}
