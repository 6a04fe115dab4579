/**
 * Browser entry point. Wires the client, session, and renderers together
 * and polls the pending queue on the session's interval. All logic lives in
 * the imported modules; this file only touches the DOM.
 */

import { GatewayClient } from './client.js'
import { renderBanner, renderNotFound, renderQueue, renderTrace } from './render.js'
import { ConsoleSession } from './session.js'
import { DecisionKind } from './types.js'
import { GatewayApiError } from './client.js'

function requireElement(id: string): HTMLElement {
  const element = document.getElementById(id)
  if (element === null) throw new Error(`missing element #${id}`)
  return element
}

export function startConsole(baseUrl: string, principalId: string, clearance: number): void {
  const client = new GatewayClient(baseUrl)
  const session = new ConsoleSession(client, { principalId, clearance })

  const queueView = requireElement('queue')
  const traceView = requireElement('trace')
  const bannerView = requireElement('banner')

  async function refresh(): Promise<void> {
    try {
      const items = await session.refreshQueue()
      queueView.innerHTML = renderQueue(items)
      bannerView.innerHTML = ''
    } catch {
      bannerView.innerHTML = renderBanner('offline', 'gateway unreachable; retrying')
    }
  }

  async function showTrace(taskId: string): Promise<void> {
    try {
      traceView.innerHTML = renderTrace(await client.getTrace(taskId))
    } catch (error) {
      if (error instanceof GatewayApiError && error.status === 404) {
        traceView.innerHTML = renderNotFound(taskId)
        return
      }
      throw error
    }
  }

  async function decide(itemId: string, decision: DecisionKind, rationale: string): Promise<void> {
    const outcome = await session.decide(itemId, decision, rationale)
    if (outcome.kind === 'blocked') {
      bannerView.innerHTML = renderBanner('error', outcome.reason)
    } else if (outcome.kind === 'conflict') {
      bannerView.innerHTML = renderBanner('conflict', outcome.banner)
    } else if (outcome.kind === 'error') {
      bannerView.innerHTML = renderBanner('error', `${outcome.code}: ${outcome.detail}`)
    }
    await refresh()
  }

  queueView.addEventListener('click', event => {
    const row = (event.target as HTMLElement).closest('tr[data-item]')
    const taskCell = row?.querySelector('td:first-child')
    if (taskCell?.textContent) void showTrace(taskCell.textContent)
  })

  const decideButton = document.getElementById('decide')
  decideButton?.addEventListener('click', () => {
    const itemId = (requireElement('item-id') as HTMLInputElement).value
    const decision = (requireElement('decision') as HTMLSelectElement).value as DecisionKind
    const rationale = (requireElement('rationale') as HTMLTextAreaElement).value
    void decide(itemId, decision, rationale)
  })

  void refresh()
  setInterval(() => void refresh(), session.pollIntervalMs)
}

// Auto-start only inside a real browser document.
if (typeof document !== 'undefined' && document.getElementById('queue') !== null) {
  const config = document.body.dataset
  startConsole(
    config.gatewayUrl ?? 'http://127.0.0.1:8470',
    config.principal ?? 'reviewer-1',
    Number(config.clearance ?? '1')
  )
}
