/**
 * Reviewer session logic: clearance filtering, mandatory rationale, and
 * stale-decision protection. The session never caches a pending item across
 * a decision; every action re-validates against the live gateway.
 */

import { GatewayApiError, GatewayClient } from './client.js'
import { DecisionKind, PendingItem } from './types.js'

export interface SessionConfig {
  principalId: string
  clearance: number
  selectedLevel?: number
  pollIntervalMs?: number
}

export type DecisionOutcome =
  | { kind: 'decided'; taskState: string }
  | { kind: 'blocked'; reason: string }
  | { kind: 'conflict'; banner: string }
  | { kind: 'error'; code: string; detail: string }

/** Items the principal is cleared to decide, optionally pinned to one level. */
export function visibleItems(
  items: PendingItem[],
  clearance: number,
  selectedLevel?: number
): PendingItem[] {
  return items.filter(
    item =>
      item.level <= clearance &&
      (selectedLevel === undefined || item.level === selectedLevel)
  )
}

/** Client-side rationale gate; mirrors the gateway's EmptyRationale check. */
export function rationaleProblem(rationale: string): string | null {
  return rationale.trim().length === 0
    ? 'a non-empty rationale is required before deciding'
    : null
}

export class ConsoleSession {
  readonly principalId: string
  readonly clearance: number
  selectedLevel?: number
  readonly pollIntervalMs: number

  constructor(private readonly client: GatewayClient, config: SessionConfig) {
    this.principalId = config.principalId
    this.clearance = config.clearance
    this.selectedLevel = config.selectedLevel
    this.pollIntervalMs = config.pollIntervalMs ?? 2000
  }

  async refreshQueue(): Promise<PendingItem[]> {
    const items = await this.client.listPending({ principal: this.principalId })
    return visibleItems(items, this.clearance, this.selectedLevel)
  }

  /**
   * Post a decision. Rationale is checked before any network call; a
   * conflict (decided in another session) becomes a banner, not a crash.
   */
  async decide(
    itemId: string,
    decision: DecisionKind,
    rationale: string
  ): Promise<DecisionOutcome> {
    const problem = rationaleProblem(rationale)
    if (problem !== null) return { kind: 'blocked', reason: problem }
    try {
      const response = await this.client.postDecision(
        itemId,
        this.principalId,
        decision,
        rationale
      )
      return { kind: 'decided', taskState: response.task_state }
    } catch (error) {
      if (error instanceof GatewayApiError) {
        if (error.code === 'ALREADY_DECIDED') {
          return {
            kind: 'conflict',
            banner: `item ${itemId} was already decided in another session`
          }
        }
        return { kind: 'error', code: error.code, detail: error.detail }
      }
      throw error
    }
  }

  async escalate(itemId: string, reason: string): Promise<DecisionOutcome> {
    try {
      await this.client.postEscalation(itemId, this.principalId, reason)
      return { kind: 'decided', taskState: 'pending' }
    } catch (error) {
      if (error instanceof GatewayApiError) {
        return { kind: 'error', code: error.code, detail: error.detail }
      }
      throw error
    }
  }
}
