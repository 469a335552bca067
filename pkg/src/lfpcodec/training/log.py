import csv
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import UsageError


@dataclass
class StepRecord:
    step: int
    loss: float
    lr: float
    wall_ms: float
    disc_loss: float | None = None
    disc_real: int | None = None
    disc_generated: int | None = None


@dataclass
class LrEvent:
    step: int
    old_lr: float
    new_lr: float


@dataclass
class TrainLog:
    records: list[StepRecord] = field(default_factory=list)
    lr_events: list[LrEvent] = field(default_factory=list)
    checkpoints: list[tuple[int, Path]] = field(default_factory=list)

    def record(self, entry: StepRecord) -> None:
        if self.records and entry.step <= self.records[-1].step:
            raise UsageError(
                f"step {entry.step} recorded after step {self.records[-1].step}"
            )
        self.records.append(entry)

    @property
    def losses(self) -> list[float]:
        return [r.loss for r in self.records]

    def smoothed(self, step: int, window: int = 100) -> float:
        """Mean loss over the `window` records ending at `step`."""
        upto = [r.loss for r in self.records if r.step <= step][-window:]
        if not upto:
            raise UsageError(f"no records up to step {step}")
        return sum(upto) / len(upto)

    def write_csv(self, path: Path) -> None:
        adversarial = any(r.disc_loss is not None for r in self.records)
        header = ["step", "loss", "lr", "wall_ms"] + (["disc_loss"] if adversarial else [])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for r in self.records:
                row = [r.step, f"{r.loss:.6f}", f"{r.lr:.6g}", f"{r.wall_ms:.3f}"]
                if adversarial:
                    row.append("" if r.disc_loss is None else f"{r.disc_loss:.6f}")
                writer.writerow(row)
