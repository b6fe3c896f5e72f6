/** Payload shapes of the session service JSON API. */

export interface ClipHit {
  id: string
  score: number
}

export type StageRole = 'match' | 'guide' | 'target'

export interface Stage {
  role: StageRole
  prompt: string
  clips: ClipHit[]
}

export interface SessionResponse {
  emotion: number[]
  tier: 'tier1' | 'tier2'
  degraded: boolean
  stages: Stage[]
}

export const MEASURES = [
  'mood_impact',
  'emotion_accuracy',
  'atmosphere',
  'coherence',
] as const

export type Measure = (typeof MEASURES)[number]

export type Ratings = Record<Measure, number>

export const MEASURE_LABELS: Record<Measure, string> = {
  mood_impact: 'Watching this had a positive impact on my mood',
  emotion_accuracy: 'It reflected the emotions I described',
  atmosphere: 'The overall atmosphere felt right',
  coherence: 'Sound and visuals fit together',
}

/** Each journey stage runs this long before auto-advancing. */
export const STAGE_DURATION_MS = 180_000
