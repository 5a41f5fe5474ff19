"""Enrollment, the three-frame authentication state machine, and the
grant/deny decision.

A session accepts exactly three frame traces in order. Each trace is
classified with the session's algorithm; a trace that cannot be normalized is
recorded as a rejected frame and the session still runs to completion, so an
observer cannot tell which frame failed. Access is granted only when all
three frames classify to shapes and the resulting triple verifies against
the enrolled hash; denial reasons never identify the failing frame.
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .catalog import Catalog, FramePlan, default_tree, template_set
from .enrollment import DEFAULT_ITERATIONS, Enrollment, make_enrollment
from .errors import (
    DegenerateBBox,
    DegeneratePath,
    InsufficientSamples,
    LockedOut,
    SessionIncomplete,
    SessionOrder,
    UnknownUser,
)
from .features import trace_features
from .geometry import MIN_TRACE_SAMPLES, RawTrace, normalize
from .matching import REJECT_THRESHOLD, classify_template
from .tree import classify_tree

FRAME_COUNT = 3

REASON_MISMATCH = "classification-mismatch"
REASON_REJECTED = "frame-rejected"


@dataclass(frozen=True)
class FrameResult:
    """Classification of one frame; shape None means the frame was rejected."""

    shape: Optional[str]
    distance: Optional[float]

    @property
    def rejected(self) -> bool:
        return self.shape is None


@dataclass(frozen=True)
class Decision:
    granted: bool
    reason: Optional[str] = None  # REASON_MISMATCH or REASON_REJECTED


@dataclass
class AuthSession:
    """Per-attempt state: frames are submitted strictly in order 1..3 and the
    decision, once made, is terminal."""

    user: str
    algorithm: str
    nonce: str
    frames: list[FrameResult] = field(default_factory=list)
    decision: Optional[Decision] = None

    @property
    def decided(self) -> bool:
        return self.decision is not None

    @property
    def state(self) -> str:
        if self.decided:
            return "decided"
        return f"await-frame-{len(self.frames) + 1}"

    @property
    def next_frame_index(self) -> int:
        return len(self.frames) + 1


@dataclass(frozen=True)
class RateLimitPolicy:
    """Spacing between attempts plus a denial-count lockout."""

    min_session_gap_s: float = 2.0
    max_denials: int = 5
    denial_window_s: float = 600.0
    lockout_s: float = 300.0


@dataclass
class _LimiterState:
    last_decided: Optional[float] = None
    denials: deque = field(default_factory=deque)
    locked_until: float = 0.0


class AuthEngine:
    """Owns enrollments, per-user classifier state, and rate limiting.

    Pass a StoreRoot to persist enrollments and pick up user-trained
    templates/models; without one the engine is purely in-memory. The
    enrollment store and lockout counters are safe for concurrent use across
    sessions; an individual AuthSession must not be driven concurrently.
    """

    def __init__(self, catalog: Catalog, store=None, *,
                 templates=None, tree=None,
                 reject_threshold: float = REJECT_THRESHOLD,
                 rate_limit: Optional[RateLimitPolicy] = RateLimitPolicy(),
                 hash_iterations: int = DEFAULT_ITERATIONS,
                 clock: Callable[[], float] = time.monotonic):
        self.catalog = catalog
        self.store = store
        self.reject_threshold = reject_threshold
        self.rate_limit = rate_limit
        self.hash_iterations = hash_iterations
        self._clock = clock
        self._default_templates = templates if templates is not None else template_set(catalog)
        self._default_tree = tree if tree is not None else default_tree(catalog)
        self._lock = threading.Lock()
        self._limiters: dict[str, _LimiterState] = {}
        self._user_templates: dict[str, object] = {}
        self._user_trees: dict[str, object] = {}
        if store is not None:
            from .store import load_users

            self._users = load_users(store)
        else:
            self._users = {}

    @property
    def plan(self) -> FramePlan:
        return self.catalog.plan

    # -- enrollment ----------------------------------------------------

    def enroll(self, user: str, triple, algorithm: str = "template") -> Enrollment:
        """Create or replace a user's enrollment (password change)."""
        enr = make_enrollment(user, triple, algorithm, self.hash_iterations)
        with self._lock:
            self._users[user] = enr
        if self.store is not None:
            from .store import save_enrollment

            save_enrollment(self.store, enr)
        return enr

    def enrollment_for(self, user: str) -> Enrollment:
        with self._lock:
            if user in self._users:
                return self._users[user]
        raise UnknownUser(f"user {user!r} is not enrolled")

    def invalidate_user_cache(self, user: str) -> None:
        with self._lock:
            self._user_templates.pop(user, None)
            self._user_trees.pop(user, None)

    def _templates_for(self, user: str):
        with self._lock:
            if user in self._user_templates:
                return self._user_templates[user]
        found = self._default_templates
        if self.store is not None:
            from .errors import NotFound
            from .store import load_template_set

            try:
                found = load_template_set(self.store, user)
            except NotFound:
                pass
        with self._lock:
            self._user_templates[user] = found
        return found

    def _tree_for(self, user: str):
        with self._lock:
            if user in self._user_trees:
                return self._user_trees[user]
        found = self._default_tree
        if self.store is not None:
            from .errors import NotFound
            from .store import load_tree_model

            try:
                found = load_tree_model(self.store, user)
            except NotFound:
                pass
        with self._lock:
            self._user_trees[user] = found
        return found

    # -- rate limiting -------------------------------------------------

    def _check_rate_limit(self, user: str) -> None:
        if self.rate_limit is None:
            return
        now = self._clock()
        with self._lock:
            st = self._limiters.setdefault(user, _LimiterState())
            if now < st.locked_until:
                raise LockedOut(
                    f"user {user!r} locked out for {st.locked_until - now:.0f} s"
                )
            if st.last_decided is not None and (
                now - st.last_decided < self.rate_limit.min_session_gap_s
            ):
                raise LockedOut(
                    f"user {user!r} must wait "
                    f"{self.rate_limit.min_session_gap_s:.0f} s between attempts"
                )

    def _record_decision(self, user: str, decision: Decision) -> None:
        if self.rate_limit is None:
            return
        now = self._clock()
        with self._lock:
            st = self._limiters.setdefault(user, _LimiterState())
            st.last_decided = now
            if decision.granted:
                return
            st.denials.append(now)
            while st.denials and st.denials[0] < now - self.rate_limit.denial_window_s:
                st.denials.popleft()
            if len(st.denials) >= self.rate_limit.max_denials:
                st.locked_until = now + self.rate_limit.lockout_s
                st.denials.clear()

    # -- session state machine ------------------------------------------

    def begin_session(self, user: str, algorithm: Optional[str] = None) -> AuthSession:
        enr = self.enrollment_for(user)
        self._check_rate_limit(user)
        return AuthSession(
            user=user,
            algorithm=algorithm or enr.algorithm,
            nonce=uuid.uuid4().hex,
        )

    def _classify_frame(self, user: str, algorithm: str,
                        trace: Optional[RawTrace]) -> FrameResult:
        if trace is None or trace.n_samples < MIN_TRACE_SAMPLES:
            return FrameResult(None, None)
        try:
            if algorithm == "template":
                candidate = normalize(trace)
                match = classify_template(candidate, self._templates_for(user),
                                          reject_threshold=None)
                if match.distance > self.reject_threshold:
                    return FrameResult(None, match.distance)
                return FrameResult(match.shape, match.distance)
            label = classify_tree(self._tree_for(user), trace_features(trace))
            return FrameResult(label, None)
        except (InsufficientSamples, DegeneratePath, DegenerateBBox):
            return FrameResult(None, None)

    def submit_frame(self, session: AuthSession,
                     trace: Optional[RawTrace]) -> FrameResult:
        """Classify one frame's trace and advance the session.

        A trace of None (or one that fails normalization) records a rejected
        frame; the session still advances so failures stay indistinguishable.
        After the third frame the decision is computed and the session is
        terminal.
        """
        if session.decided:
            raise SessionOrder("session already decided; no further frames accepted")
        result = self._classify_frame(session.user, session.algorithm, trace)
        session.frames.append(result)
        if len(session.frames) == FRAME_COUNT:
            session.decision = self._decide_frames(session)
            self._record_decision(session.user, session.decision)
        return result

    def _decide_frames(self, session: AuthSession) -> Decision:
        enr = self.enrollment_for(session.user)
        if any(f.rejected for f in session.frames):
            return Decision(False, REASON_REJECTED)
        triple = tuple(f.shape for f in session.frames)
        if enr.verify(triple):
            return Decision(True, None)
        return Decision(False, REASON_MISMATCH)

    def decide(self, session: AuthSession) -> Decision:
        """Return the session's decision; it is a pure function of the three
        recorded frame classifications and the stored enrollment."""
        if session.decision is None:
            raise SessionIncomplete(
                f"only {len(session.frames)} of {FRAME_COUNT} frames recorded"
            )
        return session.decision

    def abandon(self, session: AuthSession) -> Decision:
        """Terminate a session early as a denial (protocol violation path)."""
        if not session.decided:
            while len(session.frames) < FRAME_COUNT:
                session.frames.append(FrameResult(None, None))
            session.decision = Decision(False, REASON_REJECTED)
            self._record_decision(session.user, session.decision)
        return session.decision

    def authenticate(self, user: str, traces, algorithm: Optional[str] = None,
                     ) -> Decision:
        """Run a whole session over three traces and return the decision."""
        session = self.begin_session(user, algorithm)
        for trace in traces:
            self.submit_frame(session, trace)
        return self.decide(session)
