/** Browser bootstrap: materialize the virtual tree and wire delegated events. */

import { makeApiClient } from './api.js'
import { SessionController } from './controller.js'
import { render, type VNode } from './render.js'
import type { Measure } from './types.js'

function toDom(node: VNode | string): Node {
  if (typeof node === 'string') {
    return document.createTextNode(node)
  }
  const element = document.createElement(node.tag)
  for (const [name, value] of Object.entries(node.attrs)) {
    element.setAttribute(name, value)
  }
  for (const child of node.children) {
    element.appendChild(toDom(child))
  }
  return element
}

function handleAction(controller: SessionController, action: string): void {
  if (action === 'submit-mood') {
    void controller.submitMood()
  } else if (action === 'advance') {
    controller.advance()
  } else if (action === 'submit-feedback') {
    void controller.submitFeedback()
  } else if (action === 'reset') {
    controller.reset()
  } else if (action.startsWith('rate:')) {
    const [, measure, value] = action.split(':')
    controller.rate(measure as Measure, Number(value))
  }
}

export function mount(container: HTMLElement, controller: SessionController): void {
  const rerender = () => {
    container.replaceChildren(toDom(render(controller.store.getState())))
  }
  controller.store.subscribe(rerender)
  rerender()

  container.addEventListener('click', (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>('[data-action]')
    const action = target?.dataset['action']
    if (action && action !== 'edit-text') {
      handleAction(controller, action)
    }
  })
  container.addEventListener('input', (event) => {
    const target = event.target as HTMLTextAreaElement
    if (target.dataset['action'] === 'edit-text') {
      controller.setText(target.value)
    }
  })
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  const controller = new SessionController(makeApiClient())
  mount(document.getElementById('app') as HTMLElement, controller)
}
