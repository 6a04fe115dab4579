/**
 * Typed HTTP client for the gateway. Every mutation flows through the
 * documented decision/escalation endpoints; the console holds no state the
 * gateway does not confirm.
 */

import {
  DecisionKind,
  DecisionResponse,
  DecisionResponseSchema,
  ErrorBodySchema,
  EscalationResponseSchema,
  PendingItem,
  PendingResponseSchema,
  ScorecardResponseSchema,
  SubmitResponseSchema,
  TaskStateSchema,
  TraceResponse,
  TraceResponseSchema
} from './types.js'

/** A structured gateway error (stable machine-readable code + detail). */
export class GatewayApiError extends Error {
  constructor(
    readonly code: string,
    readonly detail: string,
    readonly status: number
  ) {
    super(`${code}: ${detail}`)
    this.name = 'GatewayApiError'
  }
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch
  ) {}

  private async request<T>(
    method: string,
    path: string,
    options: { principal?: string; body?: unknown; parse: (data: unknown) => T }
  ): Promise<T> {
    const headers: Record<string, string> = {}
    if (options.principal) headers['X-Principal'] = options.principal
    if (options.body !== undefined) headers['Content-Type'] = 'application/json'
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: options.body === undefined ? undefined : JSON.stringify(options.body)
    })
    const data: unknown = await response.json()
    if (!response.ok) {
      const parsed = ErrorBodySchema.safeParse(data)
      if (parsed.success) {
        throw new GatewayApiError(parsed.data.error, parsed.data.detail, response.status)
      }
      throw new GatewayApiError('HTTP_ERROR', `status ${response.status}`, response.status)
    }
    return options.parse(data)
  }

  listPending(filter: { level?: number; principal?: string } = {}): Promise<PendingItem[]> {
    const params = new URLSearchParams()
    if (filter.level !== undefined) params.set('level', String(filter.level))
    if (filter.principal !== undefined) params.set('principal', filter.principal)
    const query = params.size > 0 ? `?${params}` : ''
    return this.request('GET', `/pending${query}`, {
      parse: data => PendingResponseSchema.parse(data).items
    })
  }

  getTrace(taskId: string): Promise<TraceResponse> {
    return this.request('GET', `/trace/${taskId}`, {
      parse: data => TraceResponseSchema.parse(data)
    })
  }

  getTaskState(taskId: string): Promise<string> {
    return this.request('GET', `/tasks/${taskId}`, {
      parse: data => TaskStateSchema.parse(data).state
    })
  }

  postDecision(
    itemId: string,
    principal: string,
    decision: DecisionKind,
    rationale: string
  ): Promise<DecisionResponse> {
    return this.request('POST', `/pending/${itemId}/decision`, {
      principal,
      body: { decision, rationale },
      parse: data => DecisionResponseSchema.parse(data)
    })
  }

  postEscalation(itemId: string, principal: string, reason: string) {
    return this.request('POST', `/pending/${itemId}/escalation`, {
      principal,
      body: { reason },
      parse: data => EscalationResponseSchema.parse(data)
    })
  }

  submitTask(sourceId: string, domainTag: string, body: string, principal: string) {
    return this.request('POST', '/tasks', {
      principal,
      body: { source_id: sourceId, domain_tag: domainTag, body },
      parse: data => SubmitResponseSchema.parse(data)
    })
  }

  getScorecard(): Promise<Record<string, number>> {
    return this.request('GET', '/scorecard', {
      parse: data => ScorecardResponseSchema.parse(data).scorecard
    })
  }
}
