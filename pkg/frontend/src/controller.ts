/**
 * Orchestration around the state machine: server calls and the per-stage
 * auto-advance timer. One in-flight request at a time by construction
 * (submit paths are guarded by the machine's phase checks).
 */

import type { ApiClient } from './api.js'
import type { Measure, Ratings } from './types.js'
import { STAGE_DURATION_MS } from './types.js'
import {
  canSubmitFeedback,
  canSubmitMood,
  createStore,
  type Phase,
  type Store,
  type UiSessionState,
} from './sessionMachine.js'

const STAGE_PHASES: readonly Phase[] = ['stage1', 'stage2', 'stage3']

export class SessionController {
  readonly store: Store
  private timer: ReturnType<typeof setTimeout> | null = null
  private lastPhase: Phase

  constructor(
    private readonly api: ApiClient,
    store: Store = createStore(),
    private readonly stageDurationMs: number = STAGE_DURATION_MS,
  ) {
    this.store = store
    this.lastPhase = store.getState().phase
    store.subscribe((state) => this.syncTimer(state))
  }

  private syncTimer(state: UiSessionState): void {
    if (state.phase === this.lastPhase) {
      return
    }
    this.lastPhase = state.phase
    if (this.timer !== null) {
      clearTimeout(this.timer)
      this.timer = null
    }
    if (STAGE_PHASES.includes(state.phase)) {
      this.timer = setTimeout(() => {
        this.timer = null
        this.advance()
      }, this.stageDurationMs)
    }
  }

  setText(text: string): void {
    this.store.dispatch({ type: 'TEXT_CHANGED', text })
  }

  async submitMood(): Promise<void> {
    const state = this.store.getState()
    if (!canSubmitMood(state)) {
      return
    }
    this.store.dispatch({ type: 'SUBMIT' })
    try {
      const session = await this.api.createSession(state.text.trim())
      this.store.dispatch({ type: 'SESSION_RECEIVED', session })
    } catch (error) {
      this.store.dispatch({ type: 'SESSION_FAILED', message: describeError(error) })
    }
  }

  /** Manual skip; also what the stage timer fires. */
  advance(): void {
    this.store.dispatch({ type: 'ADVANCE' })
  }

  rate(measure: Measure, value: number): void {
    this.store.dispatch({ type: 'RATE', measure, value })
  }

  async submitFeedback(): Promise<void> {
    const state = this.store.getState()
    if (!canSubmitFeedback(state)) {
      return
    }
    this.store.dispatch({ type: 'SUBMIT_FEEDBACK' })
    try {
      await this.api.sendFeedback(state.ratings as Ratings)
      this.store.dispatch({ type: 'FEEDBACK_SENT' })
    } catch (error) {
      this.store.dispatch({ type: 'FEEDBACK_FAILED', message: describeError(error) })
    }
  }

  reset(): void {
    this.store.dispatch({ type: 'RESET' })
  }
}

function describeError(error: unknown): string {
  if (error instanceof Error) {
    return error.message
  }
  return String(error)
}
