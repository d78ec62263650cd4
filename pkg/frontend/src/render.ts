import type { EditRecord, Point, PredictResponse, SceneTracks } from './types.js';

export interface Viewport {
    scale: number;
    offsetX: number;
    offsetY: number;
}

/** Fit a bounding box into a canvas with padding; y is flipped (screen down). */
export function fitViewport(points: Point[], width: number, height: number, pad = 30): Viewport {
    if (!points.length) {
        return { scale: 1, offsetX: width / 2, offsetY: height / 2 };
    }
    let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
    for (const [x, y] of points) {
        minX = Math.min(minX, x); maxX = Math.max(maxX, x);
        minY = Math.min(minY, y); maxY = Math.max(maxY, y);
    }
    const spanX = Math.max(maxX - minX, 1e-6);
    const spanY = Math.max(maxY - minY, 1e-6);
    const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY);
    return {
        scale,
        offsetX: pad - minX * scale + (width - 2 * pad - spanX * scale) / 2,
        offsetY: height - pad + minY * scale - (height - 2 * pad - spanY * scale) / 2,
    };
}

export function toScreen(p: Point, vp: Viewport): Point {
    return [p[0] * vp.scale + vp.offsetX, -p[1] * vp.scale + vp.offsetY];
}

export function toScene(p: Point, vp: Viewport): Point {
    return [(p[0] - vp.offsetX) / vp.scale, -(p[1] - vp.offsetY) / vp.scale];
}

/** Index of the candidate with the lowest mean per-step displacement. */
export function bestCandidate(candidates: Point[][], truth: Point[] | null): number {
    if (!truth || !candidates.length) return -1;
    let best = -1, bestAde = Infinity;
    candidates.forEach((cand, k) => {
        let total = 0;
        for (let t = 0; t < truth.length; t++) {
            total += Math.hypot(cand[t][0] - truth[t][0], cand[t][1] - truth[t][1]);
        }
        const ade = total / truth.length;
        if (ade < bestAde) { bestAde = ade; best = k; }
    });
    return best;
}

function polyline(ctx: CanvasRenderingContext2D, pts: Point[], vp: Viewport): void {
    ctx.beginPath();
    pts.forEach((p, i) => {
        const [sx, sy] = toScreen(p, vp);
        if (i === 0) ctx.moveTo(sx, sy); else ctx.lineTo(sx, sy);
    });
    ctx.stroke();
}

function dot(ctx: CanvasRenderingContext2D, p: Point, vp: Viewport, r: number): void {
    const [sx, sy] = toScreen(p, vp);
    ctx.beginPath();
    ctx.arc(sx, sy, r, 0, 2 * Math.PI);
    ctx.fill();
}

export class SceneRenderer {
    viewport: Viewport = { scale: 1, offsetX: 0, offsetY: 0 };

    constructor(private canvas: HTMLCanvasElement) {}

    draw(tracks: SceneTracks | null, response: PredictResponse | null,
         edits: EditRecord[]): void {
        const ctx = this.canvas.getContext('2d');
        if (!ctx) return;
        const { width, height } = this.canvas;
        ctx.clearRect(0, 0, width, height);

        const cloud: Point[] = [];
        if (tracks) {
            for (const t of Object.values(tracks.tracks)) cloud.push(...t.points);
        }
        if (response) {
            cloud.push(...response.target.observed);
            for (const c of response.candidates) cloud.push(...c);
        }
        for (const e of edits) cloud.push(...e.track);
        this.viewport = fitViewport(cloud, width, height);
        const vp = this.viewport;

        // background tracks
        if (tracks) {
            ctx.lineWidth = 1;
            for (const [agentId, track] of Object.entries(tracks.tracks)) {
                ctx.strokeStyle = 'rgba(150,160,175,0.45)';
                polyline(ctx, track.points, vp);
                ctx.fillStyle = 'rgba(150,160,175,0.8)';
                dot(ctx, track.points[track.points.length - 1], vp, 3);
                const [sx, sy] = toScreen(track.points[track.points.length - 1], vp);
                ctx.fillStyle = 'rgba(190,200,210,0.7)';
                ctx.font = '10px system-ui';
                ctx.fillText(agentId, sx + 5, sy - 5);
            }
        }
        if (!response) return;

        // group rings around members
        if (tracks) {
            ctx.strokeStyle = '#d9a521';
            ctx.lineWidth = 2;
            for (const member of response.group.member_ids) {
                const track = tracks.tracks[member];
                const last = track ? track.points[track.points.length - 1]
                    : edits.find((e) => e.agent_id === member)?.position;
                if (!last) continue;
                const [sx, sy] = toScreen(last, vp);
                ctx.beginPath();
                ctx.arc(sx, sy, 9, 0, 2 * Math.PI);
                ctx.stroke();
            }
        }

        // candidate futures, best-by-ADE highlighted
        const best = bestCandidate(response.candidates, response.target.future_truth);
        const last = response.target.observed[response.target.observed.length - 1];
        response.candidates.forEach((cand, k) => {
            ctx.strokeStyle = k === best ? '#5dd39e' : 'rgba(93,211,158,0.25)';
            ctx.lineWidth = k === best ? 2.5 : 1;
            polyline(ctx, [last, ...cand], vp);
        });

        // linear fit, ground truth, observed
        ctx.setLineDash([5, 4]);
        ctx.strokeStyle = 'rgba(140,140,150,0.9)';
        ctx.lineWidth = 1;
        polyline(ctx, [last, ...response.linear_fit], vp);
        ctx.setLineDash([]);
        if (response.target.future_truth) {
            ctx.strokeStyle = '#f2f2f4';
            ctx.lineWidth = 2;
            polyline(ctx, [last, ...response.target.future_truth], vp);
        }
        ctx.strokeStyle = '#4c7fb8';
        ctx.lineWidth = 3;
        polyline(ctx, response.target.observed, vp);
        ctx.fillStyle = '#4c7fb8';
        dot(ctx, last, vp, 5);

        // edited agents
        for (const edit of edits) {
            ctx.strokeStyle = edit.role === 'neighbor' ? '#e4572e' : '#d9a521';
            ctx.lineWidth = 2;
            polyline(ctx, edit.track, vp);
            ctx.fillStyle = ctx.strokeStyle;
            dot(ctx, edit.position, vp, 5);
        }
    }
}
