// Single-page rating UI.  Three views: task list, rater demographics, and
// the rating screen (highlighted DSL, concept summary panel, collapsible
// prompt, four Likert widgets with submit gating, comment box, progress
// bar).  All state lives in this module; the backend is reached only
// through RatingApi.

import {
    ApiError,
    CRITERIA,
    CRITERION_LABELS,
    Criterion,
    Progress,
    RatingApi,
    Scores,
    TaskDetail,
    TaskOutput,
} from "./api.js";
import {highlight} from "./highlight.js";

export const AGE_BANDS = ["18-24", "25-34", "35-44", "45-54", "55+"];
export const DSL_EXPERIENCE = ["none", "basic", "advanced"];
export const LLM_USAGE = ["never", "monthly", "weekly", "daily"];

interface Session {
    raterId: string | null;
    task: TaskDetail | null;
    outputIndex: number;
}

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

export class RatingApp {
    private readonly session: Session = {raterId: null, task: null, outputIndex: 0};

    constructor(
        private readonly api: RatingApi,
        private readonly root: HTMLElement,
    ) {}

    async start(): Promise<void> {
        await this.showTaskList();
    }

    // -- task list ----------------------------------------------------------

    async showTaskList(): Promise<void> {
        this.root.replaceChildren();
        const heading = el("h1", "title", "Rating tasks");
        const list = el("ul", "task-list");
        try {
            const tasks = await this.api.listTasks();
            for (const task of tasks) {
                const item = el("li", "task-item");
                const button = el("button", "task-open", `${task.title} (${task.output_count} outputs)`);
                button.dataset.taskId = task.task_id;
                button.addEventListener("click", () => void this.openTask(task.task_id));
                item.append(button);
                list.append(item);
            }
        } catch (error) {
            list.append(el("li", "error", describeError(error)));
        }
        this.root.append(heading, list);
    }

    async openTask(taskId: string): Promise<void> {
        this.session.task = await this.api.getTask(taskId);
        this.session.outputIndex = 0;
        if (this.session.raterId === null) {
            this.showDemographics();
        } else {
            await this.showRating();
        }
    }

    // -- demographics -------------------------------------------------------

    showDemographics(): void {
        this.root.replaceChildren();
        const form = el("form", "demographics");
        form.append(el("h1", "title", "About you"));

        const raterInput = el("input", "field-rater");
        raterInput.name = "rater_id";
        raterInput.required = true;
        form.append(labelled("Rater ID", raterInput));

        const selects: Record<string, HTMLSelectElement> = {
            age_band: makeSelect("age_band", AGE_BANDS),
            gender: makeSelect("gender",
                ["woman", "man", "nonbinary", "prefer not to say"]),
            dsl_experience: makeSelect("dsl_experience", DSL_EXPERIENCE),
            llm_usage_frequency: makeSelect("llm_usage_frequency", LLM_USAGE),
        };
        form.append(
            labelled("Age band", selects.age_band),
            labelled("Gender", selects.gender),
            labelled("Experience with modeling DSLs", selects.dsl_experience),
            labelled("How often do you use LLMs?", selects.llm_usage_frequency),
        );

        const error = el("p", "error", "");
        const submit = el("button", "demographics-submit", "Continue");
        submit.type = "submit";
        form.append(error, submit);

        form.addEventListener("submit", (event) => {
            event.preventDefault();
            void (async () => {
                try {
                    await this.api.registerRater({
                        rater_id: raterInput.value.trim(),
                        age_band: selects.age_band.value,
                        gender: selects.gender.value,
                        dsl_experience: selects.dsl_experience.value,
                        llm_usage_frequency: selects.llm_usage_frequency.value,
                    });
                    this.session.raterId = raterInput.value.trim();
                    await this.showRating();
                } catch (err) {
                    error.textContent = describeError(err);
                }
            })();
        });
        this.root.append(form);
    }

    // -- rating view --------------------------------------------------------

    async showRating(): Promise<void> {
        const task = this.session.task;
        const raterId = this.session.raterId;
        if (!task || !raterId) throw new Error("no task or rater in session");
        const output = task.outputs[this.session.outputIndex];
        if (!output) {
            this.showDone();
            return;
        }

        this.root.replaceChildren();
        this.root.append(el("h1", "title", `${task.title} — ${output.label}`));
        this.root.append(await this.progressBar(raterId));
        this.root.append(this.dslPanel(output), this.summaryPanel(output),
            this.promptPanel(output), this.ratingForm(task, output, raterId));
    }

    private async progressBar(raterId: string): Promise<HTMLElement> {
        const wrap = el("div", "progress");
        let progress: Progress;
        try {
            progress = await this.api.getProgress(raterId);
        } catch {
            progress = {rated: 0, total: 0};
        }
        const bar = el("div", "progress-bar");
        const fill = el("div", "progress-fill");
        const pct = progress.total > 0
            ? Math.round((100 * progress.rated) / progress.total)
            : 0;
        fill.style.width = `${pct}%`;
        bar.append(fill);
        wrap.append(bar, el("span", "progress-text",
            `${progress.rated} / ${progress.total} rated`));
        return wrap;
    }

    private dslPanel(output: TaskOutput): HTMLElement {
        const panel = el("section", "dsl-panel");
        const pre = el("pre", "dsl-code");
        pre.innerHTML = highlight(output.dsl_text);
        panel.append(el("h2", undefined, "Generated model"), pre);
        return panel;
    }

    private summaryPanel(output: TaskOutput): HTMLElement {
        const panel = el("section", "summary-panel");
        panel.append(el("h2", undefined, "Summary"));
        panel.append(el("p", "summary-counts",
            `${output.summary.concept_count} concepts, ` +
            `${output.summary.enum_count} enums`));
        const list = el("ul", "summary-concepts");
        for (const concept of output.summary.concepts) {
            const item = el("li", "summary-concept");
            item.append(el("strong", undefined, concept.name));
            const members = [...concept.attributes, ...concept.references];
            if (members.length > 0) {
                const inner = el("ul");
                for (const member of members) {
                    inner.append(el("li", undefined, member));
                }
                item.append(inner);
            }
            list.append(item);
        }
        panel.append(list);
        return panel;
    }

    private promptPanel(output: TaskOutput): HTMLElement {
        const panel = el("details", "prompt-panel");
        const toggle = el("summary", "prompt-toggle", "? What was the model asked?");
        const body = el("pre", "prompt-text", output.prompt_text);
        panel.append(toggle, body);
        return panel;
    }

    private ratingForm(task: TaskDetail, output: TaskOutput, raterId: string): HTMLElement {
        const form = el("form", "rating-form");
        const scores: Partial<Scores> = {};

        for (const criterion of CRITERIA) {
            form.append(this.likertRow(criterion, scores, () => syncGate()));
        }

        const comment = el("textarea", "comment-box");
        comment.name = "comment";
        comment.placeholder = "Optional comment";
        form.append(labelled("Comment", comment));

        const error = el("p", "error", "");
        const submit = el("button", "rating-submit", "Submit rating");
        submit.type = "submit";
        submit.disabled = true;
        form.append(error, submit);

        const syncGate = (): void => {
            submit.disabled = CRITERIA.some((c) => scores[c] === undefined);
        };

        form.addEventListener("submit", (event) => {
            event.preventDefault();
            void (async () => {
                try {
                    await this.api.submitRating(
                        raterId, task.task_id, output.output_id,
                        scores as Scores, comment.value || undefined);
                    this.session.outputIndex += 1;
                    await this.showRating();
                } catch (err) {
                    if (err instanceof ApiError && err.status === 409) {
                        // Already rated (e.g. after a reload): just move on.
                        this.session.outputIndex += 1;
                        await this.showRating();
                        return;
                    }
                    error.textContent = describeError(err);
                }
            })();
        });
        return form;
    }

    private likertRow(
        criterion: Criterion, scores: Partial<Scores>, onChange: () => void,
    ): HTMLElement {
        const row = el("fieldset", "likert-row");
        row.dataset.criterion = criterion;
        row.append(el("legend", undefined, CRITERION_LABELS[criterion]));
        for (let value = 1; value <= 5; value += 1) {
            const label = el("label", "likert-option");
            const radio = el("input");
            radio.type = "radio";
            radio.name = criterion;
            radio.value = String(value);
            radio.addEventListener("change", () => {
                scores[criterion] = value;
                onChange();
            });
            label.append(radio, document.createTextNode(String(value)));
            row.append(label);
        }
        return row;
    }

    private showDone(): void {
        this.root.replaceChildren();
        this.root.append(
            el("h1", "title", "All outputs rated"),
            el("p", "done-text", "Thank you! Every output in this task has been rated."),
        );
        const back = el("button", "back-to-tasks", "Back to tasks");
        back.addEventListener("click", () => void this.showTaskList());
        this.root.append(back);
    }
}

function makeSelect(name: string, options: string[]): HTMLSelectElement {
    const select = document.createElement("select");
    select.name = name;
    for (const value of options) {
        const option = document.createElement("option");
        option.value = value;
        option.textContent = value;
        select.append(option);
    }
    return select;
}

function labelled(text: string, control: HTMLElement): HTMLElement {
    const wrap = el("label", "field");
    wrap.append(el("span", "field-label", text), control);
    return wrap;
}

function describeError(error: unknown): string {
    if (error instanceof ApiError) return error.message;
    if (error instanceof Error) return error.message;
    return String(error);
}
