// Typed client for the rating-service HTTP API.  Every call goes over
// fetch and every response body is checked against a zod schema, so a
// drifting backend fails loudly instead of rendering garbage.

import {z} from "zod";

export const CRITERIA = [
    "semantic_correctness",
    "concept_identification",
    "completeness",
    "advanced_features",
] as const;

export type Criterion = (typeof CRITERIA)[number];

export const CRITERION_LABELS: Record<Criterion, string> = {
    semantic_correctness: "Semantic correctness",
    concept_identification: "Concept identification",
    completeness: "Completeness",
    advanced_features: "Advanced features",
};

const taskListItemSchema = z.object({
    task_id: z.string(),
    title: z.string(),
    output_count: z.number().int().nonnegative(),
});

const conceptSummarySchema = z.object({
    name: z.string(),
    attributes: z.array(z.string()),
    references: z.array(z.string()),
}).passthrough();

const summarySchema = z.object({
    concept_count: z.number().int().nonnegative(),
    enum_count: z.number().int().nonnegative(),
    concepts: z.array(conceptSummarySchema).default([]),
    enums: z.array(z.string()).default([]),
}).passthrough();

const outputSchema = z.object({
    output_id: z.string(),
    label: z.string(),
    dsl_text: z.string(),
    summary: summarySchema,
    prompt_text: z.string(),
});

const taskDetailSchema = z.object({
    task_id: z.string(),
    title: z.string(),
    outputs: z.array(outputSchema),
});

const progressSchema = z.object({
    rated: z.number().int().nonnegative(),
    total: z.number().int().nonnegative(),
});

export type TaskListItem = z.infer<typeof taskListItemSchema>;
export type TaskDetail = z.infer<typeof taskDetailSchema>;
export type TaskOutput = z.infer<typeof outputSchema>;
export type Progress = z.infer<typeof progressSchema>;

export interface RaterProfile {
    rater_id: string;
    age_band: string;
    gender: string;
    dsl_experience: string;
    llm_usage_frequency: string;
}

export type Scores = Record<Criterion, number>;

export class ApiError extends Error {
    constructor(readonly status: number, detail: string) {
        super(`HTTP ${status}: ${detail}`);
    }
}

async function request(base: string, path: string, init?: RequestInit): Promise<unknown> {
    const response = await fetch(`${base}${path}`, {
        headers: {"Content-Type": "application/json"},
        ...init,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
        const detail = typeof (body as {detail?: unknown}).detail === "string"
            ? (body as {detail: string}).detail
            : response.statusText;
        throw new ApiError(response.status, detail);
    }
    return body;
}

export class RatingApi {
    constructor(readonly base: string) {}

    async listTasks(): Promise<TaskListItem[]> {
        const body = await request(this.base, "/api/tasks");
        return z.array(taskListItemSchema).parse(body);
    }

    async getTask(taskId: string): Promise<TaskDetail> {
        const body = await request(this.base, `/api/tasks/${encodeURIComponent(taskId)}`);
        return taskDetailSchema.parse(body);
    }

    async registerRater(profile: RaterProfile): Promise<void> {
        await request(this.base, "/api/raters", {
            method: "POST",
            body: JSON.stringify(profile),
        });
    }

    async submitRating(
        raterId: string, taskId: string, outputId: string,
        scores: Scores, comment?: string,
    ): Promise<string> {
        const body = await request(this.base, "/api/ratings", {
            method: "POST",
            body: JSON.stringify({
                rater_id: raterId,
                task_id: taskId,
                output_id: outputId,
                scores,
                comment: comment ?? null,
            }),
        });
        return z.object({rating_id: z.string()}).parse(body).rating_id;
    }

    async getProgress(raterId: string): Promise<Progress> {
        const body = await request(this.base, `/api/progress/${encodeURIComponent(raterId)}`);
        return progressSchema.parse(body);
    }
}
