/**
 * Pure HTML-string producers. No DOM access and no state: everything shown
 * maps 1:1 to gateway data, which keeps the views trivially testable.
 */

import { PendingItem, TRACE_FIELD_ORDER, TraceResponse } from './types.js'

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}

function formatValue(value: unknown, naMarker: string): string {
  if (value === null || value === undefined) {
    return '<span class="missing">missing</span>'
  }
  if (value === naMarker) {
    return '<span class="na">not applicable</span>'
  }
  if (typeof value === 'string') return escapeHtml(value)
  return escapeHtml(JSON.stringify(value))
}

export function renderEmptyQueue(): string {
  return '<p class="empty-state">No items are waiting for your review.</p>'
}

export function renderQueue(items: PendingItem[]): string {
  if (items.length === 0) return renderEmptyQueue()
  const rows = items.map(item => {
    const flags =
      item.red_team_flags.length > 0
        ? `<span class="flags">${escapeHtml(item.red_team_flags.join(', '))}</span>`
        : ''
    const confidence = item.confidence === null ? 'n/a' : item.confidence.toFixed(3)
    return (
      `<tr data-item="${escapeHtml(item.item_id)}">` +
      `<td>${escapeHtml(item.item_id)}</td>` +
      `<td>${escapeHtml(item.domain_tag ?? 'unknown')}</td>` +
      `<td>${escapeHtml(item.provenance_tier ?? 'unknown')}</td>` +
      `<td>${confidence}</td>` +
      `<td>${escapeHtml(item.verdict)}</td>` +
      `<td>${escapeHtml(item.triggered_rules.join(', '))}${flags}</td>` +
      `<td>level ${item.level}</td>` +
      '</tr>'
    )
  })
  return (
    '<table class="queue"><thead><tr>' +
    '<th>item</th><th>domain</th><th>provenance</th><th>confidence</th>' +
    '<th>verdict</th><th>rules</th><th>level</th>' +
    `</tr></thead><tbody>${rows.join('')}</tbody></table>`
  )
}

export function renderTrace(trace: TraceResponse): string {
  const rows = TRACE_FIELD_ORDER.map(name => {
    const value = trace.fields[name]
    return (
      `<tr><th>${escapeHtml(name)}</th>` +
      `<td>${formatValue(value, trace.not_applicable_marker)}</td></tr>`
    )
  })
  const completeness = trace.complete
    ? '<span class="complete">complete</span>'
    : '<span class="incomplete">incomplete</span>'
  return (
    `<section class="trace" data-task="${escapeHtml(trace.task_id)}">` +
    `<h2>Decision trace for ${escapeHtml(trace.task_id)}</h2>` +
    `<p>trace: ${completeness}; log chain: ${escapeHtml(trace.chain_status)}</p>` +
    `<table>${rows.join('')}</table>` +
    '</section>'
  )
}

export function renderNotFound(taskId: string): string {
  return `<p class="not-found">No task with id ${escapeHtml(taskId)} is known to the gateway.</p>`
}

export function renderBanner(kind: 'conflict' | 'error' | 'offline', text: string): string {
  return `<div class="banner banner-${kind}">${escapeHtml(text)}</div>`
}

export function renderScorecard(scorecard: Record<string, number>): string {
  const rows = Object.entries(scorecard).map(
    ([axis, score]) => `<tr><th>${escapeHtml(axis)}</th><td>${score.toFixed(3)}</td></tr>`
  )
  return `<table class="scorecard">${rows.join('')}</table>`
}
