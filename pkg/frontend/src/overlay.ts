// Overlay construction from a segment response. The mask arrives as a
// base64 PNG and the browser's native decoder unpacks it; nothing here
// recomputes scores or thresholds.

export async function decodeMaskPng(b64: string): Promise<ImageBitmap> {
    const bin = atob(b64);
    const bytes = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) bytes[i] = bin.charCodeAt(i);
    return createImageBitmap(new Blob([bytes], { type: "image/png" }));
}

/** Offscreen canvas with the object pixels tinted and everything else
 * transparent. Mask PNGs are 8-bit gray, object = 255. */
export function tintMask(mask: ImageBitmap, rgb: [number, number, number]): HTMLCanvasElement {
    const canvas = document.createElement("canvas");
    canvas.width = mask.width;
    canvas.height = mask.height;
    const ctx = canvas.getContext("2d")!;
    ctx.drawImage(mask, 0, 0);
    const data = ctx.getImageData(0, 0, mask.width, mask.height);
    const px = data.data;
    for (let i = 0; i < px.length; i += 4) {
        const on = px[i] > 127;
        px[i] = rgb[0];
        px[i + 1] = rgb[1];
        px[i + 2] = rgb[2];
        px[i + 3] = on ? 255 : 0;
    }
    ctx.putImageData(data, 0, 0);
    return canvas;
}
