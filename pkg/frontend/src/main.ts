/**
 * Browser entry point: canvas annotation client over the /v1 service.
 *
 * Pure logic (coordinate transforms, RLE decode, RGBA compositing, state
 * transitions) lives in the sibling modules; this file only wires them to
 * the DOM. Masks are never edited client-side: every label shown comes
 * verbatim from a server reply.
 */

import { ApiClient, ApiError } from "./api.js";
import type { PromptPoint } from "./api.js";
import { bitmapFromGray, overlayRgba } from "./overlay.js";
import {
  applyPromptReply,
  applyResync,
  applyUndoReply,
  beginMutation,
  canMutate,
  failMutation,
  initialState,
  markFinalized,
  type AnnotationState,
} from "./state.js";
import { clampPan, identityTransform, screenToImage, imageToScreen, stepZoom, type ViewTransform } from "./transform.js";

const api = new ApiClient();

interface AppState {
  images: string[];
  index: number;
  finalized: Set<string>;
  ann: AnnotationState | null;
  baseImage: HTMLImageElement | null;
  view: ViewTransform;
  alpha: number;
  showBoxes: boolean;
  banner: string | null;
  pendingFinalize: boolean;
}

const app: AppState = {
  images: [],
  index: 0,
  finalized: new Set(),
  ann: null,
  baseImage: null,
  view: identityTransform(),
  alpha: 0.55,
  showBoxes: false,
  banner: null,
  pendingFinalize: false,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("view");
const maybeCtx = canvas.getContext("2d");
if (!maybeCtx) throw new Error("2d canvas context unavailable");
const ctx: CanvasRenderingContext2D = maybeCtx;

const statusEl = el<HTMLSpanElement>("status");
const progressEl = el<HTMLSpanElement>("progress");
const bannerEl = el<HTMLDivElement>("banner");
const toastEl = el<HTMLDivElement>("toast");
const zoomEl = el<HTMLSpanElement>("zoom-level");
const alphaEl = el<HTMLInputElement>("alpha");
const boxesEl = el<HTMLInputElement>("boxes");
const undoBtn = el<HTMLButtonElement>("undo");
const finalizeBtn = el<HTMLButtonElement>("finalize");
const retryBtn = el<HTMLButtonElement>("retry");
const zoomInBtn = el<HTMLButtonElement>("zoom-in");
const zoomOutBtn = el<HTMLButtonElement>("zoom-out");

let toastTimer: ReturnType<typeof setTimeout> | null = null;

function toast(message: string): void {
  toastEl.textContent = message;
  toastEl.classList.add("visible");
  if (toastTimer) clearTimeout(toastTimer);
  toastTimer = setTimeout(() => toastEl.classList.remove("visible"), 4000);
}

function setBanner(message: string | null): void {
  app.banner = message;
  bannerEl.textContent = message ?? "";
  bannerEl.classList.toggle("visible", message !== null);
}

function updateControls(): void {
  const ann = app.ann;
  const busy = ann !== null && !canMutate(ann);
  undoBtn.disabled = ann === null || busy || ann.prompts.length === 0;
  finalizeBtn.disabled = ann === null || busy;
  retryBtn.classList.toggle("visible", app.pendingFinalize);
  zoomEl.textContent = `${app.view.zoom}x`;
  canvas.classList.toggle("busy", busy);
  const done = app.finalized.size;
  progressEl.textContent = app.images.length
    ? `finalized ${done} / ${app.images.length}`
    : "no manifest images";
  if (ann) {
    statusEl.textContent = `${ann.imageId}  rev ${ann.revision}  prompts ${ann.prompts.length}`;
  } else {
    statusEl.textContent = "";
  }
}

// Offscreen canvas reused for native-resolution overlay compositing.
const overlayCanvas = document.createElement("canvas");

function draw(): void {
  ctx.save();
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const ann = app.ann;
  if (!ann || !app.baseImage) {
    ctx.restore();
    updateControls();
    return;
  }
  const origin = imageToScreen(0, 0, app.view);
  const w = ann.width * app.view.zoom;
  const h = ann.height * app.view.zoom;
  ctx.drawImage(app.baseImage, origin.x, origin.y, w, h);

  if (app.alpha > 0 && ann.mask.some((v) => v)) {
    overlayCanvas.width = ann.width;
    overlayCanvas.height = ann.height;
    const octx = overlayCanvas.getContext("2d");
    if (octx) {
      const rgba = overlayRgba(ann.mask, ann.width, ann.height, app.alpha);
      octx.putImageData(new ImageData(rgba, ann.width, ann.height), 0, 0);
      ctx.drawImage(overlayCanvas, origin.x, origin.y, w, h);
    }
  }

  if (app.showBoxes) {
    ctx.strokeStyle = "#ffb347";
    ctx.lineWidth = 1;
    for (const cluster of ann.clusters) {
      if (!cluster.kept) continue;
      const [x1, y1, x2, y2] = cluster.bbox;
      const a = imageToScreen(x1, y1, app.view);
      const b = imageToScreen(x2 + 1, y2 + 1, app.view);
      ctx.strokeRect(a.x + 0.5, a.y + 0.5, b.x - a.x - 1, b.y - a.y - 1);
    }
  }

  // Prompt markers stay visible regardless of overlay opacity.
  for (const p of ann.prompts) {
    const c = imageToScreen(p.x + 0.5, p.y + 0.5, app.view);
    ctx.strokeStyle = "#ff5c5c";
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(c.x, c.y, 5, 0, Math.PI * 2);
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(c.x - 8, c.y);
    ctx.lineTo(c.x + 8, c.y);
    ctx.moveTo(c.x, c.y - 8);
    ctx.lineTo(c.x, c.y + 8);
    ctx.stroke();
  }
  ctx.restore();
  updateControls();
}

function loadPng(url: string): Promise<HTMLImageElement> {
  return new Promise((resolve, reject) => {
    const img = new Image();
    img.onload = () => resolve(img);
    img.onerror = () => reject(new Error(`failed to load ${url}`));
    img.src = `${url}?t=${Date.now()}`;
  });
}

/** Fetch label.png and recover the 0/1 bitmap from its gray values. */
async function fetchLabelBitmap(sessionId: string, width: number, height: number): Promise<Uint8Array> {
  const img = await loadPng(api.labelPngUrl(sessionId));
  const scratch = document.createElement("canvas");
  scratch.width = width;
  scratch.height = height;
  const sctx = scratch.getContext("2d");
  if (!sctx) throw new Error("2d canvas context unavailable");
  sctx.drawImage(img, 0, 0);
  const data = sctx.getImageData(0, 0, width, height).data;
  const gray = new Uint8Array(width * height);
  for (let i = 0; i < gray.length; i++) {
    gray[i] = data[i * 4] ?? 0;
  }
  return bitmapFromGray(gray);
}

/** Stale revision: adopt the server's state wholesale, replay nothing. */
async function resync(): Promise<void> {
  const ann = app.ann;
  if (!ann) return;
  try {
    const server = await api.sessionState(ann.sessionId);
    const mask = await fetchLabelBitmap(ann.sessionId, ann.width, ann.height);
    app.ann = applyResync(ann, server, mask);
    toast(`out of date; reloaded server revision ${server.revision}`);
  } catch (err) {
    app.ann = failMutation(ann);
    toast(`resync failed: ${String(err)}`);
  }
}

async function submitPrompt(pixel: PromptPoint): Promise<void> {
  const ann = app.ann;
  if (!ann || !canMutate(ann)) return;
  const pending = beginMutation(ann);
  app.ann = pending;
  updateControls();
  try {
    const reply = await api.addPrompt(pending.sessionId, {
      x: pixel.x,
      y: pixel.y,
      kind: pixel.kind,
      revision: pending.revision,
    });
    try {
      app.ann = applyPromptReply(pending, pixel, reply);
      setBanner(null);
    } catch (decodeErr) {
      app.ann = failMutation(pending);
      setBanner(`label decode failed: ${String(decodeErr)}`);
    }
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      await resync();
    } else if (err instanceof ApiError && err.status === 422) {
      app.ann = failMutation(pending);
      const message =
        typeof err.detail === "object" && err.detail !== null && "message" in err.detail
          ? String((err.detail as { message: unknown }).message)
          : String(err.detail);
      toast(`prompt (${pixel.x}, ${pixel.y}) rejected: ${message}`);
    } else {
      app.ann = failMutation(pending);
      toast(`request failed: ${String(err)}`);
    }
  }
  draw();
}

async function undoLast(): Promise<void> {
  const ann = app.ann;
  if (!ann || !canMutate(ann) || ann.prompts.length === 0) return;
  const pending = beginMutation(ann);
  app.ann = pending;
  updateControls();
  try {
    const reply = await api.undoPrompt(pending.sessionId, pending.revision);
    app.ann = applyUndoReply(pending, reply);
    setBanner(null);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      await resync();
    } else {
      app.ann = failMutation(pending);
      toast(`undo failed: ${String(err)}`);
    }
  }
  draw();
}

async function finalizeCurrent(): Promise<void> {
  const ann = app.ann;
  if (!ann || !canMutate(ann)) return;
  const pending = beginMutation(ann);
  app.ann = pending;
  app.pendingFinalize = false;
  updateControls();
  try {
    await api.finalize(pending.sessionId);
    app.ann = markFinalized(failMutation(pending));
    app.finalized.add(pending.imageId);
    toast(`finalized ${pending.imageId}`);
    await advance();
  } catch (err) {
    app.ann = failMutation(pending);
    app.pendingFinalize = true;
    toast(`finalize failed, use retry: ${String(err)}`);
  }
  draw();
}

async function openImage(imageId: string): Promise<void> {
  statusEl.textContent = `loading ${imageId}...`;
  const info = await api.openSession({ image_id: imageId });
  app.ann = initialState(info);
  app.baseImage = await loadPng(api.imagePngUrl(info.session_id));
  app.view = identityTransform();
  setBanner(null);
  draw();
}

async function advance(): Promise<void> {
  if (app.index + 1 < app.images.length) {
    app.index += 1;
    const next = app.images[app.index];
    if (next) await openImage(next);
  } else {
    app.ann = null;
    app.baseImage = null;
    statusEl.textContent = "all images finalized";
    draw();
  }
}

function canvasPoint(ev: MouseEvent): { sx: number; sy: number } {
  const rect = canvas.getBoundingClientRect();
  return { sx: ev.clientX - rect.left, sy: ev.clientY - rect.top };
}

let dragging = false;
let dragMoved = false;
let dragStart = { sx: 0, sy: 0, panX: 0, panY: 0 };

canvas.addEventListener("pointerdown", (ev) => {
  if (ev.shiftKey || ev.button === 1) {
    const { sx, sy } = canvasPoint(ev);
    dragging = true;
    dragMoved = false;
    dragStart = { sx, sy, panX: app.view.panX, panY: app.view.panY };
    canvas.setPointerCapture(ev.pointerId);
    ev.preventDefault();
  }
});

canvas.addEventListener("pointermove", (ev) => {
  if (!dragging) return;
  const { sx, sy } = canvasPoint(ev);
  if (Math.abs(sx - dragStart.sx) + Math.abs(sy - dragStart.sy) > 2) dragMoved = true;
  const ann = app.ann;
  if (!ann) return;
  app.view = clampPan(
    {
      zoom: app.view.zoom,
      panX: dragStart.panX - (sx - dragStart.sx) / app.view.zoom,
      panY: dragStart.panY - (sy - dragStart.sy) / app.view.zoom,
    },
    ann.width,
    ann.height,
    canvas.width,
    canvas.height,
  );
  draw();
});

canvas.addEventListener("pointerup", () => {
  dragging = false;
});

canvas.addEventListener("click", (ev) => {
  if (dragMoved || ev.shiftKey) {
    dragMoved = false;
    return;
  }
  const ann = app.ann;
  if (!ann) return;
  const { sx, sy } = canvasPoint(ev);
  const pixel = screenToImage(sx, sy, app.view, ann.width, ann.height);
  if (!pixel) return; // outside the image: no request at all
  void submitPrompt({ x: pixel.x, y: pixel.y, kind: "centroid" });
});

function applyZoom(direction: 1 | -1, anchorSx: number, anchorSy: number): void {
  const before = app.view;
  const zoom = stepZoom(before.zoom, direction);
  if (zoom === before.zoom) return;
  // Keep the image point under the anchor fixed on screen.
  const ix = anchorSx / before.zoom + before.panX;
  const iy = anchorSy / before.zoom + before.panY;
  const next = { zoom, panX: ix - anchorSx / zoom, panY: iy - anchorSy / zoom };
  const ann = app.ann;
  app.view = ann ? clampPan(next, ann.width, ann.height, canvas.width, canvas.height) : next;
  draw();
}

canvas.addEventListener(
  "wheel",
  (ev) => {
    ev.preventDefault();
    const { sx, sy } = canvasPoint(ev);
    applyZoom(ev.deltaY < 0 ? 1 : -1, sx, sy);
  },
  { passive: false },
);

zoomInBtn.addEventListener("click", () => applyZoom(1, canvas.width / 2, canvas.height / 2));
zoomOutBtn.addEventListener("click", () => applyZoom(-1, canvas.width / 2, canvas.height / 2));

alphaEl.addEventListener("input", () => {
  app.alpha = Number(alphaEl.value) / 100;
  draw();
});

boxesEl.addEventListener("change", () => {
  app.showBoxes = boxesEl.checked;
  draw();
});

undoBtn.addEventListener("click", () => void undoLast());
finalizeBtn.addEventListener("click", () => void finalizeCurrent());
retryBtn.addEventListener("click", () => void finalizeCurrent());

function sizeCanvas(): void {
  const holder = canvas.parentElement;
  if (!holder) return;
  canvas.width = holder.clientWidth;
  canvas.height = holder.clientHeight;
  draw();
}

window.addEventListener("resize", sizeCanvas);

async function boot(): Promise<void> {
  sizeCanvas();
  app.alpha = Number(alphaEl.value) / 100;
  try {
    await api.health();
    const listing = await api.listImages();
    app.images = listing.images;
    app.index = 0;
    const first = app.images[0];
    if (first) {
      await openImage(first);
    } else {
      statusEl.textContent = "service has no manifest images";
    }
  } catch (err) {
    setBanner(`cannot reach annotation service: ${String(err)}`);
  }
  updateControls();
}

void boot();
