"""Prompt templates and rendering.

A prompt is three parts joined by blank lines: an optional deliberation
preamble, the frame sentences (PF or NF), and a shared body rendered from
the observation. Keeping the body common to both frames guarantees that two
prompts for the same state differ only in the frame text.

Templates are plain text files with str.format placeholders. The shipped
wording is a reconstruction written for this package, not a canonical
phrasing; any directory holding the same four file names can replace it.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import TemplateError

__all__ = ["FRAMES", "PromptTemplate", "render_prompt"]

FRAMES = ("PF", "NF")

_FILES = {
    "PF": "frame_pf.txt",
    "NF": "frame_nf.txt",
    "body": "body.txt",
    "reflection": "reflection.txt",
}


def _read(name: str, directory: Path | None) -> str:
    if directory is not None:
        path = Path(directory) / name
        try:
            return path.read_text(encoding="utf-8")
        except OSError as exc:
            raise TemplateError(f"cannot read template {path}: {exc}") from exc
    try:
        return (
            resources.files("llm_bridge").joinpath("templates").joinpath(name).read_text("utf-8")
        )
    except OSError as exc:
        raise TemplateError(f"packaged template {name} is missing: {exc}") from exc


@dataclass(frozen=True)
class PromptTemplate:
    """One loaded prompt configuration: frame, reflection flag, texts."""

    frame: str
    cognitive_reflection: bool
    frame_text: str
    body_text: str
    reflection_text: str

    @classmethod
    def load(
        cls,
        frame: str,
        cognitive_reflection: bool = False,
        directory: Path | None = None,
    ) -> "PromptTemplate":
        if frame not in FRAMES:
            raise TemplateError(f"unknown frame {frame!r}; expected one of {FRAMES}")
        return cls(
            frame=frame,
            cognitive_reflection=cognitive_reflection,
            frame_text=_read(_FILES[frame], directory).strip(),
            body_text=_read(_FILES["body"], directory).strip(),
            reflection_text=_read(_FILES["reflection"], directory).strip(),
        )


def _format_strict(template_text: str, values: Mapping[str, Any]) -> str:
    """str.format with unknown or positional placeholders turned into errors."""
    try:
        return string.Formatter().vformat(template_text, (), dict(values))
    except KeyError as exc:
        raise TemplateError(f"template placeholder {{{exc.args[0]}}} has no value") from exc
    except IndexError as exc:
        raise TemplateError("template uses a positional {} placeholder; name it") from exc
    except ValueError as exc:
        raise TemplateError(f"template is not well formed: {exc}") from exc


def _partner_block(partners: Mapping[str, Mapping[str, Any]] | None) -> str:
    """Shared-state lines, present only when the observation carries them."""
    if not partners:
        return ""
    lines = ["What your partners shared this period:"]
    for name in sorted(partners):
        snap = partners[name]
        last = snap.get("last_order")
        order_desc = "no order yet" if last is None else f"last order {last}"
        lines.append(
            f"- {name}: on hand {snap['on_hand']}, backlog {snap['backlog']}, {order_desc}"
        )
    return "\n".join(lines) + "\n\n"


def _order_desc(orders: Mapping[str, Any]) -> str:
    return ", ".join(f"{channel} {qty}" for channel, qty in sorted(orders.items()))


def _memory_block(
    memory: Sequence[Mapping[str, Any]], observation: Mapping[str, Any]
) -> str:
    """Remembered periods as (order, demand that followed) lines.

    The demand a remembered order met is the next entry's last_demand; the
    newest entry reads it off the current observation.
    """
    if not memory:
        return "(nothing yet; this is your first decision or memory is off)"
    lines = []
    for i, entry in enumerate(memory):
        then = entry["observation"]
        orders = entry["action"]["orders"]
        source = memory[i + 1]["observation"] if i + 1 < len(memory) else observation
        met = source.get("last_demand")
        met_desc = "not yet known" if met is None else str(met)
        lines.append(
            f"- period {then['period']}: you ordered {_order_desc(orders)};"
            f" demand that period was {met_desc}"
        )
    return "\n".join(lines)


def render_prompt(
    template: PromptTemplate,
    observation: Mapping[str, Any],
    context: str,
    memory: Sequence[Mapping[str, Any]],
    channels: Sequence[str],
) -> str:
    """Deterministic prompt text for one observe message.

    Every value is derived from the arguments, so equal inputs give equal
    text. Partner lines appear only when the observation carries partner
    state; a placeholder with no value raises TemplateError.
    """
    last_demand = observation.get("last_demand")
    values = {
        "context": context,
        "partners": _partner_block(observation.get("partners")),
        "memory": _memory_block(memory, observation),
        "channels": ", ".join(channels),
        "period": observation["period"],
        "role": observation["role"],
        "on_hand": observation["on_hand"],
        "backlog": observation["backlog"],
        "last_demand": "none yet" if last_demand is None else last_demand,
    }
    parts = []
    if template.cognitive_reflection:
        parts.append(template.reflection_text)
    parts.append(template.frame_text)
    parts.append(_format_strict(template.body_text, values))
    return "\n\n".join(parts) + "\n"
