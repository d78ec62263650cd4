import type {
    ApiError, InstanceSummary, PredictRequest, PredictResponse, SceneSummary, SceneTracks,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiFailure extends Error {
    constructor(public detail: ApiError) {
        super(detail.error);
    }
}

/** Thin client over the prediction server; fetch is injectable for tests. */
export class ApiClient {
    constructor(
        private baseUrl: string = '',
        private fetchImpl: FetchLike = (url, init) => fetch(url, init),
    ) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const resp = await this.fetchImpl(this.baseUrl + path, init);
        const body = await resp.json();
        if (!resp.ok) {
            throw new ApiFailure({ status: resp.status, ...body });
        }
        return body as T;
    }

    async scenes(): Promise<SceneSummary[]> {
        const body = await this.request<{ scenes: SceneSummary[] }>('/scenes');
        return body.scenes;
    }

    async instances(sceneId: string): Promise<InstanceSummary[]> {
        const body = await this.request<{ instances: InstanceSummary[] }>(
            `/scenes/${encodeURIComponent(sceneId)}/instances`);
        return body.instances;
    }

    async tracks(sceneId: string): Promise<SceneTracks> {
        return this.request<SceneTracks>(`/scenes/${encodeURIComponent(sceneId)}/tracks`);
    }

    async predict(request: PredictRequest): Promise<PredictResponse> {
        return this.request<PredictResponse>('/predict', {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(request),
        });
    }
}
