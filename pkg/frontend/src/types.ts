/**
 * Wire types for the gateway API, validated with zod so a drifting backend
 * fails loudly at the boundary instead of rendering garbage.
 */

import { z } from 'zod'

export const PendingItemSchema = z.object({
  item_id: z.string(),
  task_id: z.string(),
  level: z.number().int(),
  state: z.string(),
  created_at: z.number(),
  domain_tag: z.string().nullable(),
  provenance_tier: z.string().optional(),
  verdict: z.string(),
  triggered_rules: z.array(z.string()),
  red_team_flags: z.array(z.string()),
  confidence: z.number().nullable(),
  output_kind: z.string().nullable()
})
export type PendingItem = z.infer<typeof PendingItemSchema>

export const PendingResponseSchema = z.object({
  items: z.array(PendingItemSchema)
})

// The seven trace fields; values are strings, lists, records, or the
// explicit not-applicable marker. null means the log never populated them.
export const TraceResponseSchema = z.object({
  task_id: z.string(),
  fields: z.record(z.unknown()),
  rationale_digest: z.string().nullable(),
  complete: z.boolean(),
  not_applicable_marker: z.string(),
  chain_status: z.string()
})
export type TraceResponse = z.infer<typeof TraceResponseSchema>

export const TRACE_FIELD_ORDER = [
  'model_choice',
  'version',
  'prompt',
  'context_boundaries',
  'rule_triggers',
  'human_interventions',
  'action_outcome'
] as const

export const DecisionResponseSchema = z.object({
  item_id: z.string(),
  decision: z.string(),
  task_id: z.string(),
  task_state: z.string()
})
export type DecisionResponse = z.infer<typeof DecisionResponseSchema>

export const EscalationResponseSchema = z.object({
  item_id: z.string(),
  new_item_id: z.string(),
  level: z.number().int()
})
export type EscalationResponse = z.infer<typeof EscalationResponseSchema>

export const TaskStateSchema = z.object({
  task_id: z.string(),
  state: z.string()
})

export const SubmitResponseSchema = z.object({
  task_id: z.string(),
  state: z.string()
})

export const ScorecardResponseSchema = z.object({
  scorecard: z.record(z.number())
})

export const ErrorBodySchema = z.object({
  error: z.string(),
  detail: z.string()
})

export type DecisionKind = 'approve' | 'reject' | 'override_modify'
