// View math for the segmentation canvas.
//
// The canvas shows the image scaled by `zoom` and shifted by a pan
// offset, so image pixel (row, col) covers the canvas square
// [col*zoom+panX, (col+1)*zoom+panX) x [row*zoom+panY, (row+1)*zoom+panY).
// Clicks anywhere inside that square map back to the same integer pixel,
// which is what keeps marker coordinates stable across zoom levels.

export interface ViewTransform {
    zoom: number;
    panX: number;
    panY: number;
}

export interface Pixel {
    row: number;
    col: number;
}

export const MIN_ZOOM = 0.125;
export const MAX_ZOOM = 64;

export function clampZoom(z: number): number {
    return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, z));
}

/** Canvas point to integer image pixel, or null when outside the image. */
export function canvasToPixel(
    view: ViewTransform,
    x: number,
    y: number,
    width: number,
    height: number,
): Pixel | null {
    const col = Math.floor((x - view.panX) / view.zoom);
    const row = Math.floor((y - view.panY) / view.zoom);
    if (row < 0 || row >= height || col < 0 || col >= width) return null;
    return { row, col };
}

/** Canvas coordinates of a pixel's center. */
export function pixelToCanvas(view: ViewTransform, p: Pixel): { x: number; y: number } {
    return {
        x: (p.col + 0.5) * view.zoom + view.panX,
        y: (p.row + 0.5) * view.zoom + view.panY,
    };
}

/** Scale-to-fit view, image centered in the canvas. */
export function fitView(
    imageWidth: number,
    imageHeight: number,
    canvasWidth: number,
    canvasHeight: number,
): ViewTransform {
    const zoom = clampZoom(Math.min(canvasWidth / imageWidth, canvasHeight / imageHeight));
    return {
        zoom,
        panX: (canvasWidth - imageWidth * zoom) / 2,
        panY: (canvasHeight - imageHeight * zoom) / 2,
    };
}

/** Rescale around a canvas anchor point; the image point under the
 * anchor stays put. */
export function zoomAt(view: ViewTransform, factor: number, x: number, y: number): ViewTransform {
    const zoom = clampZoom(view.zoom * factor);
    if (zoom === view.zoom) return view;
    // image-space coordinate under the anchor
    const u = (x - view.panX) / view.zoom;
    const v = (y - view.panY) / view.zoom;
    return { zoom, panX: x - u * zoom, panY: y - v * zoom };
}

export function panBy(view: ViewTransform, dx: number, dy: number): ViewTransform {
    return { zoom: view.zoom, panX: view.panX + dx, panY: view.panY + dy };
}

// The distance-falloff slider works in log10(1/decay) so one knob spans
// [1, 1e6] evenly. Slider 0 is decay 1, slider 6 is decay 1e-6.

export const DECAY_SLIDER_MIN = 0;
export const DECAY_SLIDER_MAX = 6;

export function decayFromSlider(s: number): number {
    const clamped = Math.min(DECAY_SLIDER_MAX, Math.max(DECAY_SLIDER_MIN, s));
    return Math.pow(10, -clamped);
}

export function sliderFromDecay(decay: number): number {
    if (!(decay > 0)) return DECAY_SLIDER_MAX;
    return Math.min(DECAY_SLIDER_MAX, Math.max(DECAY_SLIDER_MIN, -Math.log10(decay)));
}
