"""Launch-slot logic of the integrate-and-fire pellet controller."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InadmissibleJump, NotInJumpSet
from .flow import HybridState
from .params import SystemParams


class JumpKind(str, enum.Enum):
    SKIP = "skip"
    PELLET = "pellet"


class TieBreak(str, enum.Enum):
    """Selection on the overlap ``xi == delta`` where both jump maps apply."""

    PELLET = "pellet"
    SKIP = "skip"


@dataclass(frozen=True)
class JumpEvent:
    time: float
    jump_index: int
    kind: JumpKind
    state_before: HybridState
    state_after: HybridState


def jump_decision(
    q: HybridState, params: SystemParams, tie_break: TieBreak | str = TieBreak.PELLET
) -> JumpKind:
    """Decide between skipping the slot and firing a pellet.

    A pellet is fired once the potential has reached the threshold.  A neuron
    that has integrated nothing (``xi == 0``) never fires, even with a zero
    threshold: both choices are admissible there and firing would push the
    error down without any positive error to correct.
    """
    if q.timer < params.t_c:
        raise NotInJumpSet(f"timer {q.timer!r} has not reached the slot period {params.t_c!r}")
    if TieBreak(tie_break) is TieBreak.SKIP:
        fire = q.xi > params.delta
    else:
        fire = q.xi >= params.delta and q.xi > 0.0
    return JumpKind.PELLET if fire else JumpKind.SKIP


def apply_jump(q: HybridState, kind: JumpKind | str, params: SystemParams) -> HybridState:
    kind = JumpKind(kind)
    if q.timer < params.t_c:
        raise InadmissibleJump(f"no launch slot: timer {q.timer!r} < {params.t_c!r}")
    if kind is JumpKind.PELLET:
        if not q.xi >= params.delta:
            raise InadmissibleJump(f"pellet requires xi >= delta, got xi = {q.xi!r}")
        return HybridState(x=q.x - params.alpha, xi=0.0, timer=0.0)
    if not q.xi <= params.delta:
        raise InadmissibleJump(f"skip requires xi <= delta, got xi = {q.xi!r}")
    return HybridState(x=q.x, xi=q.xi, timer=0.0)
