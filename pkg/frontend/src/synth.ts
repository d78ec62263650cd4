import type { Point } from './types.js';

/**
 * Constant-velocity observed track for a placed agent: n_past points walking
 * at `speed` units/step along `heading`, ENDING at the placed position (the
 * last observed frame is where the user clicked).
 */
export function constantVelocityTrack(
    position: Point, heading: number, speed: number, nPast: number,
): Point[] {
    const dx = speed * Math.cos(heading);
    const dy = speed * Math.sin(heading);
    const track: Point[] = [];
    for (let i = 0; i < nPast; i++) {
        const back = nPast - 1 - i;
        track.push([position[0] - back * dx, position[1] - back * dy]);
    }
    return track;
}

/** Heading of a drag gesture from the placement point to the cursor. */
export function dragHeading(from: Point, to: Point): number {
    return Math.atan2(to[1] - from[1], to[0] - from[0]);
}

/** Summed per-frame distance to the target track (the grouping kernel sum). */
export function longTermDistance(track: Point[], target: Point[]): number {
    let sum = 0;
    for (let t = 0; t < Math.min(track.length, target.length); t++) {
        sum += Math.hypot(track[t][0] - target[t][0], track[t][1] - target[t][1]);
    }
    return sum;
}
