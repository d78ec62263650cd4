import { describe, expect, it, vi } from 'vitest';

import { ApiClient } from '../src/api.js';
import { StudioSession, SessionView } from '../src/session.js';
import type { EditRecord, PredictResponse } from '../src/types.js';
import { cannedResponse, fakeServer } from './fakes.js';

function harness(debounceMs = 40) {
    const server = fakeServer();
    const renders: { response: PredictResponse; edits: EditRecord[] }[] = [];
    const errors: string[] = [];
    const view: SessionView = {
        render: (response, edits) => renders.push({ response, edits: [...edits] }),
        error: (message) => errors.push(message),
    };
    const session = new StudioSession(new ApiClient('', server.fetchImpl), view, 4, debounceMs);
    return { server, session, renders, errors };
}

describe('StudioSession', () => {
    it('loads a baseline with a single request', async () => {
        const { server, session, renders } = harness();
        await session.load('demo', 'walker', 0);
        expect(server.calls.length).toBe(1);
        expect(server.calls[0].edits).toEqual([]);
        expect(renders.length).toBe(1);
        expect(session.baseline).not.toBeNull();
    });

    it('placing an agent issues exactly one /predict call and re-renders', async () => {
        const { server, session, renders } = harness();
        await session.load('demo', 'walker', 0);
        const before = server.calls.length;
        await session.placeAgent([2, -3], 'neighbor', Math.PI / 2, 0.2);
        expect(server.calls.length).toBe(before + 1);
        expect(renders.length).toBe(2);
        const sent = server.calls[server.calls.length - 1];
        expect(sent.edits.length).toBe(1);
        expect(sent.edits[0].role).toBe('neighbor');
        expect(sent.edits[0].track.length).toBe(4);
        // track ends exactly at the placed position
        expect(sent.edits[0].track[3]).toEqual([2, -3]);
    });

    it('debounces drag updates into one trailing request', async () => {
        vi.useFakeTimers();
        try {
            const { server, session } = harness(50);
            await session.load('demo', 'walker', 0);
            const edit = await session.placeAgent([1, 1], 'neighbor', 0, 0.1);
            const before = server.calls.length;
            for (let i = 1; i <= 10; i++) {
                session.dragHeading(edit.agent_id, i * 0.1);
            }
            expect(server.calls.length).toBe(before);        // nothing yet
            await vi.advanceTimersByTimeAsync(60);
            expect(server.calls.length).toBe(before + 1);    // one trailing call
            const sent = server.calls[server.calls.length - 1];
            const track = sent.edits[0].track;
            const heading = Math.atan2(track[3][1] - track[2][1], track[3][0] - track[2][0]);
            expect(heading).toBeCloseTo(1.0, 6);             // the newest heading won
        } finally {
            vi.useRealTimers();
        }
    });

    it('drops stale responses (latest wins)', async () => {
        const { server, session, renders } = harness();
        await session.load('demo', 'walker', 0);
        server.respondWith = (req) => cannedResponse({
            contribution: { self: 1 / (1 + req.edits.length), group: 0,
                            conception: req.edits.length / (1 + req.edits.length), degenerate: false },
        });
        server.delayMs = 30;
        const p1 = session.refresh();
        server.delayMs = 0;
        await session.placeAgent([0, 1], 'neighbor', 0, 0.1);
        await p1;                                            // slow response arrives last
        const last = renders[renders.length - 1].response;
        expect(last.contribution.conception).toBeCloseTo(0.5, 9);  // from the NEWER request
    });

    it('clearing edits restores the cached baseline without a round trip', async () => {
        const { server, session, renders } = harness();
        await session.load('demo', 'walker', 0);
        await session.placeAgent([1, 0], 'group-member', 0, 0.05);
        const callsBefore = server.calls.length;
        session.clearEdits();
        expect(server.calls.length).toBe(callsBefore);
        expect(session.edits).toEqual([]);
        expect(renders[renders.length - 1].response).toBe(session.baseline);
    });

    it('reports API failures through the view', async () => {
        const { server, session, errors } = harness();
        await session.load('demo', 'walker', 0);
        server.fetchImpl = async () => new Response(
            JSON.stringify({ error: 'edit 0: long-term distance 400.00 exceeds the group threshold 20.00' }),
            { status: 422 });
        // rebuild the client with the failing fetch
        const failing = new StudioSession(new ApiClient('', server.fetchImpl),
            { render: () => undefined, error: (m) => errors.push(m) }, 4);
        await failing.load('demo', 'walker', 0);
        expect(errors.length).toBe(1);
        expect(errors[0]).toContain('threshold');
    });
});
