import type { PredictRequest, PredictResponse } from '../src/types.js';

export function cannedResponse(overrides: Partial<PredictResponse> = {}): PredictResponse {
    return {
        target: {
            scene_id: 'demo', target_id: 'walker', window_start: 0,
            observed: [[-1.5, 0], [-1, 0], [-0.5, 0], [0, 0]],
            future_truth: [[0.5, 0], [1, 0], [1.5, 0]],
        },
        candidates: [
            [[0.5, 0.1], [1.0, 0.1], [1.5, 0.1]],
            [[0.4, -0.2], [0.9, -0.3], [1.4, -0.4]],
        ],
        linear_fit: [[0.5, 0], [1, 0], [1.5, 0]],
        group: { member_ids: [], distances: {}, distance_threshold: 20 },
        conception: { values: [0, 0, 0, 0, 0, 0, 0], counts: [0, 0, 0], partitions: {} },
        attention: { right: 0.25, left: 0.25, rear: 0.5, degenerate: false },
        contribution: { self: 0.25, group: 0.25, conception: 0.5, degenerate: false },
        ...overrides,
    };
}

export interface FakeServer {
    calls: PredictRequest[];
    fetchImpl: (url: string, init?: RequestInit) => Promise<Response>;
    respondWith: (req: PredictRequest) => PredictResponse;
    delayMs: number;
}

export function fakeServer(respondWith?: (req: PredictRequest) => PredictResponse): FakeServer {
    const server: FakeServer = {
        calls: [],
        delayMs: 0,
        respondWith: respondWith ?? (() => cannedResponse()),
        fetchImpl: async (url, init) => {
            if (url.endsWith('/predict') && init?.method === 'POST') {
                const req = JSON.parse(String(init.body)) as PredictRequest;
                server.calls.push(req);
                const body = server.respondWith(req);
                if (server.delayMs) {
                    await new Promise((resolve) => setTimeout(resolve, server.delayMs));
                }
                return new Response(JSON.stringify(body), { status: 200 });
            }
            return new Response(JSON.stringify({ error: `unexpected ${url}` }), { status: 404 });
        },
    };
    return server;
}
