export type Point = [number, number];

export type EditRole = 'neighbor' | 'group-member';

export interface EditRecord {
    agent_id: string;
    role: EditRole;
    track: Point[];
    /** client-side placement state, so drags can re-synthesize the track */
    position: Point;
    heading: number;
    speed: number;
}

export interface PredictRequest {
    scene_id: string;
    target_id: string;
    window_start: number;
    edits: { agent_id: string; role: EditRole; track: Point[] }[];
}

export interface AttentionPayload {
    right: number;
    left: number;
    rear: number;
    degenerate: boolean;
}

export interface ContributionPayload {
    self: number;
    group: number;
    conception: number;
    degenerate: boolean;
}

export interface PredictResponse {
    target: {
        scene_id: string;
        target_id: string;
        window_start: number;
        observed: Point[];
        future_truth: Point[] | null;
    };
    candidates: Point[][];
    linear_fit: Point[];
    group: {
        member_ids: string[];
        distances: Record<string, number>;
        distance_threshold: number;
    };
    conception: {
        values: number[];
        counts: number[];
        partitions: Record<string, { partition: string; angle: number }>;
    };
    attention: AttentionPayload;
    contribution: ContributionPayload;
}

export interface SceneSummary {
    id: string;
    agents: string[];
    frames: number;
    interval_seconds: number;
}

export interface InstanceSummary {
    target_id: string;
    window_start: number;
    has_future: boolean;
}

export interface SceneTracks {
    scene_id: string;
    frames: number[];
    tracks: Record<string, { frames: number[]; points: Point[] }>;
}

export interface ApiError {
    status: number;
    error: string;
    distance_threshold?: number;
}
