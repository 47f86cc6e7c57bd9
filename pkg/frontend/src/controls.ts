import type { TwinClient } from "./client.js";
import type { Topology } from "./types.js";

interface SliderSpec {
  label: string;
  min: number;
  max: number;
  step: number;
  unit: string;
  onCommit: (value: number) => void;
}

/**
 * Label + range input + live readout. The readout tracks every input
 * event; the command goes out only on change (slider release), so
 * dragging does not flood the solver queue.
 */
function makeSlider(spec: SliderSpec): { row: HTMLElement; input: HTMLInputElement } {
  const row = document.createElement("div");
  row.className = "control-row";
  const label = document.createElement("label");
  label.textContent = spec.label;
  const input = document.createElement("input");
  input.type = "range";
  input.min = String(spec.min);
  input.max = String(spec.max);
  input.step = String(spec.step);
  input.value = "0";
  const readout = document.createElement("span");
  readout.className = "readout";
  readout.textContent = `0 ${spec.unit}`;
  input.addEventListener("input", () => {
    readout.textContent = `${input.value} ${spec.unit}`;
  });
  input.addEventListener("change", () => {
    spec.onCommit(Number(input.value));
  });
  row.append(label, input, readout);
  return { row, input };
}

function makeButton(text: string, onClick: () => void): HTMLButtonElement {
  const btn = document.createElement("button");
  btn.textContent = text;
  btn.addEventListener("click", onClick);
  return btn;
}

/**
 * Build the control panel for a scene: one pressure slider per cavity,
 * a tip rotation slider, and reset/clear buttons. Reset zeroes the
 * sliders so the panel mirrors the restored rest state.
 */
export function buildControls(root: HTMLElement, topo: Topology, client: TwinClient): void {
  const sliders: HTMLInputElement[] = [];

  for (const cavity of topo.cavities) {
    const { row, input } = makeSlider({
      label: `${cavity} pressure`,
      min: 0,
      max: 4000,
      step: 50,
      unit: "Pa",
      onCommit: (pa) => client.send({ cmd: "set_pressure", cavity, pa }),
    });
    sliders.push(input);
    root.append(row);
  }

  const tip = makeSlider({
    label: "tip rotation",
    min: 0,
    max: 30,
    step: 1,
    unit: "deg",
    onCommit: (deg) => client.send({ cmd: "tip_angle", deg }),
  });
  sliders.push(tip.input);
  root.append(tip.row);

  const buttons = document.createElement("div");
  buttons.className = "control-row buttons";
  buttons.append(
    makeButton("clear touches", () => client.send({ cmd: "clear_touches" })),
    makeButton("reset", () => {
      client.send({ cmd: "reset" });
      for (const s of sliders) {
        s.value = "0";
        s.dispatchEvent(new Event("input"));
      }
    }),
  );
  root.append(buttons);
}
