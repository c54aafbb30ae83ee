/**
 * Threshold schema mirrored from the server's preset format, plus the
 * validation/clamping rules the UI enforces before any request is sent.
 */

export type SpaceName = "rgb" | "hsv" | "ycbcr" | "norm_rgb";

export interface SpaceThresholds {
  enabled: boolean;
  /** Three inclusive [min, max] channel ranges. */
  channels: [number, number][];
}

export interface SkinThresholds {
  rgb: SpaceThresholds;
  hsv: SpaceThresholds;
  ycbcr: SpaceThresholds;
  norm_rgb: SpaceThresholds;
  mask_smooth_sigma: number;
  mask_keep_threshold: number;
}

export const SPACES: SpaceName[] = ["rgb", "hsv", "ycbcr", "norm_rgb"];

export const SPACE_LABELS: Record<SpaceName, string> = {
  rgb: "RGB",
  hsv: "HSV",
  ycbcr: "YCbCr",
  norm_rgb: "Normalized RGB",
};

export const CHANNEL_LABELS: Record<SpaceName, [string, string, string]> = {
  rgb: ["R", "G", "B"],
  hsv: ["H", "S", "V"],
  ycbcr: ["Y", "Cb", "Cr"],
  norm_rgb: ["r", "g", "b"],
};

/** [max, step] per channel; sliders scale accordingly. */
export const CHANNEL_DOMAINS: Record<SpaceName, [number, number][]> = {
  rgb: [[255, 1], [255, 1], [255, 1]],
  hsv: [[360, 1], [1, 0.01], [1, 0.01]],
  ycbcr: [[255, 1], [255, 1], [255, 1]],
  norm_rgb: [[1, 0.01], [1, 0.01], [1, 0.01]],
};

/** The hue channel is the only one allowed to wrap (min > max). */
export function channelMayWrap(space: SpaceName, channel: number): boolean {
  return space === "hsv" && channel === 0;
}

export function fullRange(space: SpaceName): SpaceThresholds {
  return {
    enabled: false,
    channels: CHANNEL_DOMAINS[space].map(([max]) => [0, max] as [number, number]),
  };
}

export function defaultThresholds(): SkinThresholds {
  return {
    rgb: { ...fullRange("rgb"), enabled: true },
    hsv: fullRange("hsv"),
    ycbcr: fullRange("ycbcr"),
    norm_rgb: fullRange("norm_rgb"),
    mask_smooth_sigma: 0,
    mask_keep_threshold: 0.5,
  };
}

export function cloneThresholds(t: SkinThresholds): SkinThresholds {
  return JSON.parse(JSON.stringify(t)) as SkinThresholds;
}

/**
 * Clamp one channel edit so the result is always schema-valid: values stay
 * inside the channel domain, and min <= max unless the channel may wrap
 * and wrapping is allowed for it.
 */
export function clampRange(
  space: SpaceName,
  channel: number,
  lo: number,
  hi: number,
  allowWrap: boolean,
): [number, number] {
  const [max] = CHANNEL_DOMAINS[space][channel];
  lo = Math.min(Math.max(lo, 0), max);
  hi = Math.min(Math.max(hi, 0), max);
  if (lo > hi && !(allowWrap && channelMayWrap(space, channel))) {
    // The handle being dragged past the other clamps onto it.
    lo = hi = Math.min(lo, hi) === lo ? hi : lo;
  }
  return [lo, hi];
}

/** Schema check applied before any request leaves the UI. */
export function validateThresholds(t: SkinThresholds): string[] {
  const problems: string[] = [];
  let anyEnabled = false;
  for (const space of SPACES) {
    const st = t[space];
    if (st.enabled) anyEnabled = true;
    if (st.channels.length !== 3) {
      problems.push(`${space}: expected 3 channel ranges`);
      continue;
    }
    st.channels.forEach(([lo, hi], ci) => {
      const [max] = CHANNEL_DOMAINS[space][ci];
      if (lo < 0 || hi > max) {
        problems.push(`${space} channel ${ci}: outside [0, ${max}]`);
      }
      if (lo > hi && !channelMayWrap(space, ci)) {
        problems.push(`${space} channel ${ci}: min ${lo} > max ${hi}`);
      }
    });
  }
  if (!anyEnabled) problems.push("no color space enabled");
  if (t.mask_smooth_sigma < 0) problems.push("mask_smooth_sigma < 0");
  if (t.mask_keep_threshold < 0 || t.mask_keep_threshold > 1) {
    problems.push("mask_keep_threshold outside [0, 1]");
  }
  return problems;
}

export interface ImageEntry {
  id: number;
  filename: string;
  class: string;
}

export type ViewMode = "segmented" | "mask" | "original";
