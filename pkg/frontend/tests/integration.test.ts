// @vitest-environment jsdom
//
// End-to-end UI loop against a live prediction server. Skipped unless
// CROWDCAST_URL points at one (see run-integration.sh).
import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { ratioBars, renderBars } from '../src/charts.js';
import { StudioSession } from '../src/session.js';
import type { EditRecord, PredictResponse } from '../src/types.js';

const base = process.env.CROWDCAST_URL ?? '';

describe.skipIf(!base)('UI loop against a live server', () => {
    it('one /predict per placement; panels re-render from the payload within 1 s', async () => {
        let predictCalls = 0;
        const countingFetch = (url: string, init?: RequestInit) => {
            if (url.endsWith('/predict')) predictCalls++;
            return fetch(url, init);
        };
        const api = new ApiClient(base, countingFetch);

        const health = await fetch(`${base}/health`).then((r) => r.json());
        expect(health.status).toBe('ok');
        const nPast: number = health.window.n_past;

        const scenes = await api.scenes();
        expect(scenes.length).toBeGreaterThan(0);
        const instances = await api.instances(scenes[0].id);
        expect(instances.length).toBeGreaterThan(0);

        const renders: { response: PredictResponse; edits: EditRecord[] }[] = [];
        const errors: string[] = [];
        const session = new StudioSession(api, {
            render: (response, edits) => renders.push({ response, edits: [...edits] }),
            error: (message) => errors.push(message),
        }, nPast);

        await session.load(scenes[0].id, instances[0].target_id, instances[0].window_start);
        expect(predictCalls).toBe(1);
        expect(renders.length).toBe(1);

        // place an unrelated neighbour far from the target so the role is valid
        const observed = renders[0].response.target.observed;
        const last = observed[observed.length - 1];
        const t0 = performance.now();
        await session.placeAgent([last[0] + 30, last[1] + 30], 'neighbor', Math.PI, 0.1);
        const elapsed = performance.now() - t0;

        expect(predictCalls).toBe(2);                     // exactly one more call
        expect(renders.length).toBe(2);                   // and one re-render
        expect(elapsed).toBeLessThan(1000);

        const payload = renders[1].response;
        expect(payload.candidates.length).toBe(health.model.n_modes);
        expect(errors).toEqual([]);

        // rendered ratio bars numerically match the API payload
        const root = document.createElement('div');
        renderBars(root, ratioBars(payload.contribution), payload.contribution.degenerate);
        const byLabel: Record<string, number> = {};
        for (const row of Array.from(root.querySelectorAll('.bar-row'))) {
            byLabel[row.getAttribute('data-label') as string] = Number(row.getAttribute('data-value'));
        }
        expect(byLabel.self).toBe(payload.contribution.self);
        expect(byLabel.group).toBe(payload.contribution.group);
        expect(byLabel.conception).toBe(payload.contribution.conception);

        // clearing the edit restores the baseline without another request
        const callsBefore = predictCalls;
        session.clearEdits();
        expect(predictCalls).toBe(callsBefore);
        expect(renders[renders.length - 1].response).toBe(session.baseline);
    }, 15000);
});
