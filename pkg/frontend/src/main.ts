import { ApiClient, ApiFailure } from './api.js';
import { ratioBars, renderBars, renderFan } from './charts.js';
import { SceneRenderer, toScene } from './render.js';
import { StudioSession } from './session.js';
import { dragHeading } from './synth.js';
import type { EditRecord, EditRole, Point, PredictResponse, SceneTracks } from './types.js';

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const api = new ApiClient('');
let tracks: SceneTracks | null = null;
let renderer: SceneRenderer;
let session: StudioSession;
let nPast = 8;

function showError(message: string): void {
    const banner = $('error-banner');
    banner.textContent = message;
    banner.style.display = message ? 'block' : 'none';
    if (message) setTimeout(() => { banner.style.display = 'none'; }, 6000);
}

function view() {
    return {
        render(response: PredictResponse, edits: EditRecord[]): void {
            showError('');
            renderer.draw(tracks, response, edits);
            renderBars($('ratio-bars'), ratioBars(response.contribution),
                       response.contribution.degenerate);
            renderFan($<HTMLCanvasElement>('fan-canvas'), response.attention, $('fan-badge'));
            $('group-report').textContent = response.group.member_ids.length
                ? `group: ${response.group.member_ids.join(', ')}`
                : 'group: none';
            $('latency-note').textContent = `edits: ${session.edits.length}  requests: ${session.requestsSent}`;
        },
        error(message: string): void {
            showError(message);
        },
    };
}

async function loadScenes(): Promise<void> {
    const scenes = await api.scenes();
    const select = $<HTMLSelectElement>('scene-select');
    select.innerHTML = scenes.map((s) => `<option value="${s.id}">${s.id} (${s.agents.length} agents)</option>`).join('');
    await loadInstances();
}

async function loadInstances(): Promise<void> {
    const sceneId = $<HTMLSelectElement>('scene-select').value;
    const instances = await api.instances(sceneId);
    const select = $<HTMLSelectElement>('instance-select');
    select.innerHTML = instances.map((inst, i) =>
        `<option value="${i}" data-target="${inst.target_id}" data-start="${inst.window_start}">`
        + `${inst.target_id} @ ${inst.window_start}${inst.has_future ? '' : ' (no truth)'}</option>`).join('');
    await loadInstance();
}

async function loadInstance(): Promise<void> {
    const sceneId = $<HTMLSelectElement>('scene-select').value;
    const option = $<HTMLSelectElement>('instance-select').selectedOptions[0];
    if (!option) return;
    tracks = await api.tracks(sceneId);
    const target = option.dataset.target as string;
    const start = Number(option.dataset.start);
    await session.load(sceneId, target, start);
}

function currentRole(): EditRole {
    return ($<HTMLInputElement>('role-member').checked ? 'group-member' : 'neighbor');
}

function wireCanvas(canvas: HTMLCanvasElement): void {
    let placing: { edit: EditRecord; origin: Point } | null = null;

    canvas.addEventListener('mousedown', async (ev) => {
        const rect = canvas.getBoundingClientRect();
        const screen: Point = [ev.clientX - rect.left, ev.clientY - rect.top];
        const scenePos = toScene(screen, renderer.viewport);
        try {
            const edit = await session.placeAgent(scenePos, currentRole(),
                                                  Number($<HTMLInputElement>('heading-input').value) || 0,
                                                  Number($<HTMLInputElement>('speed-input').value) || 0.1);
            placing = { edit, origin: scenePos };
        } catch (err) {
            showError(err instanceof ApiFailure ? err.detail.error : String(err));
        }
    });
    canvas.addEventListener('mousemove', (ev) => {
        if (!placing) return;
        const rect = canvas.getBoundingClientRect();
        const scenePos = toScene([ev.clientX - rect.left, ev.clientY - rect.top], renderer.viewport);
        session.dragHeading(placing.edit.agent_id, dragHeading(placing.origin, scenePos));
    });
    const stop = () => { placing = null; };
    canvas.addEventListener('mouseup', stop);
    canvas.addEventListener('mouseleave', stop);
}

async function start(): Promise<void> {
    renderer = new SceneRenderer($<HTMLCanvasElement>('scene-canvas'));
    try {
        const health = await fetch('/health').then((r) => r.json());
        nPast = health.window?.n_past ?? nPast;
    } catch { /* health probe is best-effort */ }
    session = new StudioSession(api, view(), nPast);

    $<HTMLSelectElement>('scene-select').addEventListener('change', () => void loadInstances());
    $<HTMLSelectElement>('instance-select').addEventListener('change', () => void loadInstance());
    $('clear-edits').addEventListener('click', () => session.clearEdits());
    wireCanvas($<HTMLCanvasElement>('scene-canvas'));

    try {
        await loadScenes();
    } catch (err) {
        showError(`cannot reach the prediction server: ${err instanceof Error ? err.message : err}`);
    }
}

document.addEventListener('DOMContentLoaded', () => void start());
