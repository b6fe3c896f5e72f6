import { vi } from 'vitest'

import type { SessionResponse } from '../src/types.js'

export const SESSION: SessionResponse = {
  emotion: new Array(27).fill(0),
  tier: 'tier2',
  degraded: false,
  stages: [
    {
      role: 'match',
      prompt: 'fast tempo, minor mode, dark timbre, dissonant harmony, low register, dense density music',
      clips: [
        { id: 'nature#12', score: 0.91 },
        { id: 'nature#3', score: 0.88 },
        { id: 'nature#44', score: 0.86 },
      ],
    },
    {
      role: 'guide',
      prompt: 'moderate tempo, balanced mode, neutral timbre, mild harmony, middle register, moderate density music',
      clips: [
        { id: 'nature#7', score: 0.84 },
        { id: 'nature#29', score: 0.8 },
      ],
    },
    {
      role: 'target',
      prompt: 'slow tempo, major mode, neutral timbre, consonant harmony, middle register, sparse density music',
      clips: [{ id: 'nature#2', score: 0.93 }],
    },
  ],
}

export interface CannedResponse {
  status: number
  body?: unknown
}

/** fetch stub routing on URL; records every call it serves. */
export function fetchStub(
  handler: (url: string, init?: RequestInit) => CannedResponse,
) {
  const stub = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const { status, body } = handler(String(input), init)
    if (status === 204) {
      return new Response(null, { status })
    }
    return new Response(JSON.stringify(body ?? {}), {
      status,
      headers: { 'content-type': 'application/json' },
    })
  })
  return stub as unknown as typeof fetch & ReturnType<typeof vi.fn>
}

/** In-memory Storage implementation for asserting nothing gets persisted. */
export function recordingStorage(): Storage {
  const data = new Map<string, string>()
  return {
    get length() {
      return data.size
    },
    clear: () => data.clear(),
    getItem: (key: string) => data.get(key) ?? null,
    key: (index: number) => [...data.keys()][index] ?? null,
    removeItem: (key: string) => {
      data.delete(key)
    },
    setItem: (key: string, value: string) => {
      data.set(key, value)
    },
  }
}
