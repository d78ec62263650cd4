import { ApiClient } from './api.js';
import { constantVelocityTrack } from './synth.js';
import type { EditRecord, EditRole, Point, PredictResponse } from './types.js';

export interface SessionView {
    /** every accepted /predict response lands here exactly once */
    render(response: PredictResponse, edits: EditRecord[]): void;
    error(message: string): void;
}

/**
 * One loaded instance plus its what-if edits.
 *
 * Invariants: every committed edit issues exactly one /predict call; drags
 * are debounced into one trailing call; a response older than the newest
 * request is dropped (latest wins); clearing edits restores the cached
 * baseline without another round trip.
 */
export class StudioSession {
    edits: EditRecord[] = [];
    baseline: PredictResponse | null = null;
    current: PredictResponse | null = null;
    requestsSent = 0;

    private sceneId = '';
    private targetId = '';
    private windowStart = 0;
    private seq = 0;
    private accepted = 0;
    private debounceTimer: ReturnType<typeof setTimeout> | null = null;
    private editCounter = 0;

    constructor(
        private api: ApiClient,
        private view: SessionView,
        private nPast: number,
        private debounceMs = 150,
    ) {}

    get instanceKey(): string {
        return `${this.sceneId}/${this.targetId}@${this.windowStart}`;
    }

    async load(sceneId: string, targetId: string, windowStart: number): Promise<void> {
        this.sceneId = sceneId;
        this.targetId = targetId;
        this.windowStart = windowStart;
        this.edits = [];
        this.baseline = null;
        const response = await this.refresh();
        if (response) {
            this.baseline = response;
        }
    }

    /** Place a hypothetical agent; commits the edit and refreshes once. */
    async placeAgent(position: Point, role: EditRole, heading: number,
                     speed = 0.1): Promise<EditRecord> {
        const edit: EditRecord = {
            agent_id: `edit-${this.editCounter++}`,
            role,
            position, heading, speed,
            track: constantVelocityTrack(position, heading, speed, this.nPast),
        };
        this.edits.push(edit);
        await this.refresh();
        return edit;
    }

    /** Update an edit's heading during a drag; debounced into one request. */
    dragHeading(agentId: string, heading: number): void {
        const edit = this.edits.find((e) => e.agent_id === agentId);
        if (!edit) return;
        edit.heading = heading;
        edit.track = constantVelocityTrack(edit.position, heading, edit.speed, this.nPast);
        this.scheduleRefresh();
    }

    removeEdit(agentId: string): Promise<PredictResponse | null> {
        this.edits = this.edits.filter((e) => e.agent_id !== agentId);
        return this.refresh();
    }

    /** Drop all edits and restore the cached baseline (no round trip). */
    clearEdits(): void {
        this.edits = [];
        this.cancelPending();
        if (this.baseline) {
            this.current = this.baseline;
            this.view.render(this.baseline, this.edits);
        }
    }

    private cancelPending(): void {
        if (this.debounceTimer !== null) {
            clearTimeout(this.debounceTimer);
            this.debounceTimer = null;
        }
        this.seq++;   // orphan any in-flight response
    }

    private scheduleRefresh(): void {
        if (this.debounceTimer !== null) {
            clearTimeout(this.debounceTimer);
        }
        this.debounceTimer = setTimeout(() => {
            this.debounceTimer = null;
            void this.refresh();
        }, this.debounceMs);
    }

    async refresh(): Promise<PredictResponse | null> {
        const ticket = ++this.seq;
        this.requestsSent++;
        try {
            const response = await this.api.predict({
                scene_id: this.sceneId,
                target_id: this.targetId,
                window_start: this.windowStart,
                edits: this.edits.map(({ agent_id, role, track }) => ({ agent_id, role, track })),
            });
            if (ticket < this.seq || ticket <= this.accepted) {
                return null;   // a newer request exists; drop this response
            }
            this.accepted = ticket;
            this.current = response;
            this.view.render(response, this.edits);
            return response;
        } catch (err) {
            if (ticket < this.seq) {
                return null;
            }
            this.view.error(err instanceof Error ? err.message : String(err));
            return null;
        }
    }
}
