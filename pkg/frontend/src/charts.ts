import type { AttentionPayload, ContributionPayload } from './types.js';

export interface BarDatum {
    label: string;
    value: number;
    widthPct: number;
}

export interface FanSector {
    label: string;
    value: number;
    /** radians, angle span proportional to the value */
    start: number;
    end: number;
    color: string;
}

const PARTITION_COLORS: Record<string, string> = {
    right: '#e4572e', left: '#29a19c', rear: '#7a6fbe',
};
const RATIO_COLORS: Record<string, string> = {
    self: '#4c7fb8', group: '#d9a521', conception: '#b3558f',
};

/** Ratio bars carry the payload numbers verbatim; widths are value * 100. */
export function ratioBars(contribution: ContributionPayload): BarDatum[] {
    return (['self', 'group', 'conception'] as const).map((label) => ({
        label,
        value: contribution[label],
        widthPct: contribution[label] * 100,
    }));
}

/** Consecutive sectors with angle spans proportional to the attention values. */
export function fanSectors(attention: AttentionPayload): FanSector[] {
    if (attention.degenerate) {
        return [];
    }
    const entries = (['right', 'left', 'rear'] as const).map((label) => ({
        label, value: attention[label],
    }));
    const total = entries.reduce((acc, e) => acc + e.value, 0);
    if (total <= 0) {
        return [];
    }
    const sectors: FanSector[] = [];
    let cursor = -Math.PI / 2;   // start at the top, sweep clockwise
    for (const { label, value } of entries) {
        const span = (value / total) * 2 * Math.PI;
        sectors.push({ label, value, start: cursor, end: cursor + span,
                       color: PARTITION_COLORS[label] });
        cursor += span;
    }
    return sectors;
}

export function renderBars(root: HTMLElement, bars: BarDatum[], degenerate: boolean): void {
    if (degenerate) {
        root.innerHTML = '<div class="badge">no signal</div>';
        return;
    }
    root.innerHTML = bars.map((bar) => `
      <div class="bar-row" data-label="${bar.label}" data-value="${bar.value}">
        <div class="bar-label">${bar.label}</div>
        <div class="bar-track"><div class="bar-fill bar-${bar.label}"
             style="width:${bar.widthPct.toFixed(2)}%"></div></div>
        <div class="bar-pct">${(bar.value * 100).toFixed(1)}%</div>
      </div>`).join('');
}

export function renderFan(canvas: HTMLCanvasElement, attention: AttentionPayload,
                          badge: HTMLElement): void {
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const sectors = fanSectors(attention);
    if (!sectors.length) {
        badge.textContent = 'conception disabled';
        badge.style.display = 'block';
        return;
    }
    badge.style.display = 'none';
    const cx = canvas.width / 2;
    const cy = canvas.height / 2;
    const radius = Math.min(cx, cy) - 6;
    for (const sector of sectors) {
        ctx.beginPath();
        ctx.moveTo(cx, cy);
        ctx.arc(cx, cy, radius, sector.start, sector.end);
        ctx.closePath();
        ctx.fillStyle = sector.color;
        ctx.globalAlpha = 0.85;
        ctx.fill();
        ctx.globalAlpha = 1.0;
    }
    ctx.fillStyle = '#e8e8ea';
    ctx.font = '12px system-ui';
    for (const sector of sectors) {
        if (sector.value <= 0.001) continue;
        const mid = (sector.start + sector.end) / 2;
        ctx.fillText(`${sector.label} ${(sector.value * 100).toFixed(0)}%`,
                     cx + Math.cos(mid) * radius * 0.55 - 18,
                     cy + Math.sin(mid) * radius * 0.55);
    }
}

export { RATIO_COLORS, PARTITION_COLORS };
