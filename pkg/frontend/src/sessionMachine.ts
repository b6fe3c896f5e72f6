/**
 * Session state machine.
 *
 * Phases advance strictly along
 * input -> processing -> stage1 -> stage2 -> stage3 -> feedback -> done;
 * events arriving in the wrong phase are ignored, so skipping is impossible
 * by construction. Completing feedback wipes every piece of session data.
 */

import type { Measure, Ratings, SessionResponse } from './types.js'
import { MEASURES } from './types.js'

export type Phase =
  | 'input'
  | 'processing'
  | 'stage1'
  | 'stage2'
  | 'stage3'
  | 'feedback'
  | 'done'

export const PHASE_ORDER: readonly Phase[] = [
  'input',
  'processing',
  'stage1',
  'stage2',
  'stage3',
  'feedback',
  'done',
]

export interface UiSessionState {
  phase: Phase
  text: string
  session: SessionResponse | null
  error: string | null
  ratings: Partial<Ratings>
  sendingFeedback: boolean
}

export const initialState: UiSessionState = {
  phase: 'input',
  text: '',
  session: null,
  error: null,
  ratings: {},
  sendingFeedback: false,
}

export type UiEvent =
  | { type: 'TEXT_CHANGED'; text: string }
  | { type: 'SUBMIT' }
  | { type: 'SESSION_RECEIVED'; session: SessionResponse }
  | { type: 'SESSION_FAILED'; message: string }
  | { type: 'ADVANCE' }
  | { type: 'RATE'; measure: Measure; value: number }
  | { type: 'SUBMIT_FEEDBACK' }
  | { type: 'FEEDBACK_SENT' }
  | { type: 'FEEDBACK_FAILED'; message: string }
  | { type: 'RESET' }

export function canSubmitMood(state: UiSessionState): boolean {
  return state.phase === 'input' && state.text.trim().length > 0
}

export function canSubmitFeedback(state: UiSessionState): boolean {
  return (
    state.phase === 'feedback' &&
    !state.sendingFeedback &&
    MEASURES.every((m) => typeof state.ratings[m] === 'number')
  )
}

export function activeStageIndex(state: UiSessionState): 0 | 1 | 2 | null {
  switch (state.phase) {
    case 'stage1':
      return 0
    case 'stage2':
      return 1
    case 'stage3':
      return 2
    default:
      return null
  }
}

function validRating(value: number): boolean {
  return Number.isInteger(value) && value >= 1 && value <= 5
}

export function reduce(state: UiSessionState, event: UiEvent): UiSessionState {
  switch (event.type) {
    case 'TEXT_CHANGED':
      return state.phase === 'input' ? { ...state, text: event.text } : state

    case 'SUBMIT':
      return canSubmitMood(state)
        ? { ...state, phase: 'processing', error: null }
        : state

    case 'SESSION_RECEIVED':
      return state.phase === 'processing'
        ? { ...state, phase: 'stage1', session: event.session }
        : state

    case 'SESSION_FAILED':
      // back to input with a retry banner; the typed text is untouched
      return state.phase === 'processing'
        ? { ...state, phase: 'input', error: event.message }
        : state

    case 'ADVANCE':
      switch (state.phase) {
        case 'stage1':
          return { ...state, phase: 'stage2' }
        case 'stage2':
          return { ...state, phase: 'stage3' }
        case 'stage3':
          return { ...state, phase: 'feedback' }
        default:
          return state
      }

    case 'RATE':
      return state.phase === 'feedback' && validRating(event.value)
        ? { ...state, ratings: { ...state.ratings, [event.measure]: event.value } }
        : state

    case 'SUBMIT_FEEDBACK':
      return canSubmitFeedback(state) ? { ...state, sendingFeedback: true } : state

    case 'FEEDBACK_SENT':
      // ephemerality: nothing from the session survives into done
      return state.sendingFeedback ? { ...initialState, phase: 'done' } : state

    case 'FEEDBACK_FAILED':
      return state.sendingFeedback
        ? { ...state, sendingFeedback: false, error: event.message }
        : state

    case 'RESET':
      return initialState
  }
}

export interface Store {
  getState(): UiSessionState
  dispatch(event: UiEvent): void
  subscribe(listener: (state: UiSessionState) => void): () => void
}

export function createStore(initial: UiSessionState = initialState): Store {
  let state = initial
  const listeners = new Set<(state: UiSessionState) => void>()
  return {
    getState: () => state,
    dispatch(event: UiEvent) {
      const next = reduce(state, event)
      if (next !== state) {
        state = next
        for (const listener of [...listeners]) {
          listener(state)
        }
      }
    },
    subscribe(listener: (state: UiSessionState) => void) {
      listeners.add(listener)
      return () => {
        listeners.delete(listener)
      }
    },
  }
}
