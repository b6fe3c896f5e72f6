/**
 * Pure rendering: state in, virtual node tree out.
 *
 * Progressive disclosure is enforced here: the tree contains the content
 * of the active phase and nothing else, so a test (or a reader) can verify
 * on the node tree that no later stage leaks early. `app.ts` materializes
 * the tree into real DOM.
 */

import type { UiSessionState } from './sessionMachine.js'
import { activeStageIndex, canSubmitFeedback, canSubmitMood } from './sessionMachine.js'
import { MEASURES, MEASURE_LABELS, type Measure } from './types.js'

export interface VNode {
  tag: string
  attrs: Record<string, string>
  children: Array<VNode | string>
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: Array<VNode | string>
): VNode {
  return { tag, attrs, children }
}

export function collectText(node: VNode | string): string {
  if (typeof node === 'string') {
    return node
  }
  return node.children.map(collectText).join(' ')
}

export function findAll(node: VNode | string, predicate: (n: VNode) => boolean): VNode[] {
  if (typeof node === 'string') {
    return []
  }
  const hits = predicate(node) ? [node] : []
  return hits.concat(...node.children.map((child) => findAll(child, predicate)))
}

const STAGE_TITLES = ['Where you are', 'On the way', 'Settling down'] as const

function renderInput(state: UiSessionState): VNode {
  const submitAttrs: Record<string, string> = { 'data-action': 'submit-mood' }
  if (!canSubmitMood(state)) {
    submitAttrs['disabled'] = 'disabled'
  }
  const children: Array<VNode | string> = []
  if (state.error) {
    children.push(
      h(
        'div',
        { class: 'banner error', role: 'alert' },
        `Something went wrong: ${state.error}. Your words are still here, try again.`,
      ),
    )
  }
  children.push(
    h('label', { for: 'mood-text' }, 'How are you feeling right now?'),
    h(
      'textarea',
      {
        id: 'mood-text',
        'data-action': 'edit-text',
        rows: '4',
        maxlength: '2000',
        placeholder: 'Describe your mood in your own words',
      },
      state.text,
    ),
    h('button', submitAttrs, 'Begin'),
  )
  return h('section', { class: 'phase', 'data-phase': 'input' }, ...children)
}

function renderProcessing(): VNode {
  return h(
    'section',
    { class: 'phase', 'data-phase': 'processing' },
    h('p', { class: 'pulse' }, 'Listening. Preparing your journey...'),
  )
}

function renderStage(state: UiSessionState): VNode {
  const index = activeStageIndex(state)
  if (index === null || state.session === null) {
    return h('section', { class: 'phase', 'data-phase': 'empty' })
  }
  const stage = state.session.stages[index]
  if (stage === undefined) {
    return h('section', { class: 'phase', 'data-phase': 'empty' })
  }
  const clips = stage.clips.map((clip) =>
    h('li', { class: 'clip', 'data-clip-id': clip.id }, clip.id),
  )
  return h(
    'section',
    { class: 'phase', 'data-phase': state.phase },
    h('p', { class: 'stage-count' }, `Stage ${index + 1} of 3`),
    h('h2', {}, STAGE_TITLES[index] ?? ''),
    h('p', { class: 'prompt' }, stage.prompt),
    h('ul', { class: 'clips' }, ...clips),
    h('button', { 'data-action': 'advance' }, index < 2 ? 'Skip ahead' : 'Finish'),
  )
}

function ratingRow(state: UiSessionState, measure: Measure): VNode {
  const buttons = [1, 2, 3, 4, 5].map((value) => {
    const pressed = state.ratings[measure] === value
    return h(
      'button',
      {
        'data-action': `rate:${measure}:${value}`,
        'aria-pressed': pressed ? 'true' : 'false',
        class: pressed ? 'rating selected' : 'rating',
      },
      String(value),
    )
  })
  return h(
    'div',
    { class: 'rating-row', 'data-measure': measure },
    h('span', {}, MEASURE_LABELS[measure]),
    h('div', { class: 'rating-buttons' }, ...buttons),
  )
}

function renderFeedback(state: UiSessionState): VNode {
  const submitAttrs: Record<string, string> = { 'data-action': 'submit-feedback' }
  if (!canSubmitFeedback(state)) {
    submitAttrs['disabled'] = 'disabled'
  }
  const children: Array<VNode | string> = [
    h('h2', {}, 'Before you go'),
    h('p', {}, 'How did that feel? 1 means strongly disagree, 5 strongly agree.'),
    ...MEASURES.map((measure) => ratingRow(state, measure)),
    h('button', submitAttrs, 'Send and finish'),
  ]
  if (state.error) {
    children.push(h('div', { class: 'banner error', role: 'alert' }, state.error))
  }
  return h('section', { class: 'phase', 'data-phase': 'feedback' }, ...children)
}

function renderDone(): VNode {
  return h(
    'section',
    { class: 'phase', 'data-phase': 'done' },
    h('h2', {}, 'Take care'),
    h('p', {}, 'Nothing from this session was kept. Come back any time.'),
    h('button', { 'data-action': 'reset' }, 'Start again'),
  )
}

export function render(state: UiSessionState): VNode {
  let body: VNode
  switch (state.phase) {
    case 'input':
      body = renderInput(state)
      break
    case 'processing':
      body = renderProcessing()
      break
    case 'stage1':
    case 'stage2':
    case 'stage3':
      body = renderStage(state)
      break
    case 'feedback':
      body = renderFeedback(state)
      break
    case 'done':
      body = renderDone()
      break
  }
  return h(
    'main',
    { class: 'app theme-dark' },
    h('h1', {}, 'emojourney'),
    body,
  )
}
