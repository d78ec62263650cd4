import { describe, expect, it } from 'vitest';

import { constantVelocityTrack, dragHeading, longTermDistance } from '../src/synth.js';
import { bestCandidate, fitViewport, toScene, toScreen } from '../src/render.js';

describe('constantVelocityTrack', () => {
    it('ends at the placed position and steps uniformly along the heading', () => {
        const track = constantVelocityTrack([2, 3], Math.PI / 2, 0.5, 8);
        expect(track.length).toBe(8);
        expect(track[7]).toEqual([2, 3]);
        for (let t = 1; t < 8; t++) {
            expect(track[t][0] - track[t - 1][0]).toBeCloseTo(0, 12);
            expect(track[t][1] - track[t - 1][1]).toBeCloseTo(0.5, 12);
        }
    });

    it('zero speed places a stationary agent', () => {
        const track = constantVelocityTrack([-1, 4], 1.2, 0, 5);
        for (const p of track) expect(p).toEqual([-1, 4]);
    });
});

describe('dragHeading', () => {
    it('matches atan2 of the drag vector', () => {
        expect(dragHeading([0, 0], [1, 1])).toBeCloseTo(Math.PI / 4, 12);
        expect(dragHeading([2, 2], [1, 2])).toBeCloseTo(Math.PI, 12);
    });
});

describe('longTermDistance', () => {
    it('sums per-frame distances (constant offset case)', () => {
        const target = constantVelocityTrack([0, 0], 0, 0.5, 8);
        const mate = target.map(([x, y]) => [x, y + 1] as [number, number]);
        expect(longTermDistance(mate, target)).toBeCloseTo(8, 12);
    });
});

describe('viewport', () => {
    it('round-trips scene and screen coordinates', () => {
        const vp = fitViewport([[-5, -2], [7, 4]], 800, 600);
        for (const p of [[-5, -2], [7, 4], [0, 0], [1.25, -1]] as [number, number][]) {
            const back = toScene(toScreen(p, vp), vp);
            expect(back[0]).toBeCloseTo(p[0], 9);
            expect(back[1]).toBeCloseTo(p[1], 9);
        }
    });

    it('flips y so larger scene y is higher on screen', () => {
        const vp = fitViewport([[0, 0], [10, 10]], 400, 400);
        expect(toScreen([0, 10], vp)[1]).toBeLessThan(toScreen([0, 0], vp)[1]);
    });
});

describe('bestCandidate', () => {
    it('picks the lowest-ADE candidate against the truth', () => {
        const truth: [number, number][] = [[1, 0], [2, 0]];
        const far: [number, number][] = [[5, 5], [6, 5]];
        const close: [number, number][] = [[1.1, 0], [2.1, 0]];
        expect(bestCandidate([far, close], truth)).toBe(1);
        expect(bestCandidate([far, close], null)).toBe(-1);
    });
});
