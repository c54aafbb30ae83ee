/**
 * Dual-handle range slider built from two overlaid native range inputs.
 *
 * Dragging one handle past the other clamps onto it, so the emitted pair
 * always satisfies lo <= hi -- except when wrapping is allowed (hue), in
 * which case lo > hi is a legal wrap-around interval and no clamping
 * between the handles happens.
 */

export interface RangeSliderOptions {
  label: string;
  max: number;
  step: number;
  value: [number, number];
  allowWrap?: boolean;
  disabled?: boolean;
  onChange: (lo: number, hi: number) => void;
}

function fmt(v: number, step: number): string {
  return step < 1 ? v.toFixed(2) : String(Math.round(v));
}

export class RangeSlider {
  readonly root: HTMLElement;
  private readonly loInput: HTMLInputElement;
  private readonly hiInput: HTMLInputElement;
  private readonly readout: HTMLElement;
  private allowWrap: boolean;
  private readonly step: number;
  private readonly onChange: (lo: number, hi: number) => void;

  constructor(doc: Document, opts: RangeSliderOptions) {
    this.allowWrap = opts.allowWrap ?? false;
    this.step = opts.step;
    this.onChange = opts.onChange;

    this.root = doc.createElement("div");
    this.root.className = "range-slider";

    const label = doc.createElement("span");
    label.className = "range-label";
    label.textContent = opts.label;

    const track = doc.createElement("span");
    track.className = "range-track";

    const mk = (cls: string, value: number): HTMLInputElement => {
      const input = doc.createElement("input");
      input.type = "range";
      input.min = "0";
      input.max = String(opts.max);
      input.step = String(opts.step);
      input.value = String(value);
      input.className = cls;
      return input;
    };
    this.loInput = mk("range-lo", opts.value[0]);
    this.hiInput = mk("range-hi", opts.value[1]);

    this.readout = doc.createElement("span");
    this.readout.className = "range-readout";

    this.loInput.addEventListener("input", () => this.handleInput("lo"));
    this.hiInput.addEventListener("input", () => this.handleInput("hi"));

    track.append(this.loInput, this.hiInput);
    this.root.append(label, track, this.readout);
    this.setDisabled(opts.disabled ?? false);
    this.refreshReadout();
  }

  private handleInput(which: "lo" | "hi"): void {
    let lo = Number(this.loInput.value);
    let hi = Number(this.hiInput.value);
    if (!this.allowWrap && lo > hi) {
      // Clamp the dragged handle onto the stationary one.
      if (which === "lo") {
        lo = hi;
        this.loInput.value = String(lo);
      } else {
        hi = lo;
        this.hiInput.value = String(hi);
      }
    }
    this.refreshReadout();
    this.onChange(lo, hi);
  }

  value(): [number, number] {
    return [Number(this.loInput.value), Number(this.hiInput.value)];
  }

  setValue(lo: number, hi: number): void {
    this.loInput.value = String(lo);
    this.hiInput.value = String(hi);
    this.refreshReadout();
  }

  setDisabled(disabled: boolean): void {
    this.loInput.disabled = disabled;
    this.hiInput.disabled = disabled;
    this.root.classList.toggle("disabled", disabled);
  }

  setAllowWrap(allow: boolean): void {
    this.allowWrap = allow;
    if (!allow) {
      // Leaving wrap mode must not leave an invalid pair behind.
      const [lo, hi] = this.value();
      if (lo > hi) {
        this.hiInput.value = String(lo);
        this.refreshReadout();
        this.onChange(lo, lo);
      }
    }
  }

  private refreshReadout(): void {
    const [lo, hi] = this.value();
    const wrapped = lo > hi ? " (wraps)" : "";
    this.readout.textContent =
      `${fmt(lo, this.step)} – ${fmt(hi, this.step)}${wrapped}`;
  }
}
