"""Skeleton metadata: joint topology, bone lengths, and validation.

A skeleton is a tree of joints; each pose flattens to a K-vector laid out
joint-major (joint 0 x,y,z, joint 1 x,y,z, ...). The root joint is index 0
by convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SkeletonError(ValueError):
    """Raised for malformed skeleton definitions."""


@dataclass(frozen=True)
class SkeletonSpec:
    """Joint topology shared by every frame of a motion sequence.

    Attributes
    ----------
    joint_count : int
        Number of joints J.
    dims_per_joint : int
        Coordinates per joint (3 for 3D positions).
    joint_names : list[str]
        One label per joint.
    edges : list[tuple[int, int]]
        (parent, child) pairs; must form a tree over the J joints.
    bone_lengths : list[float] | None
        Length of the bone ending at each edge's child, aligned with
        ``edges``. None when unknown (e.g. data loaded from file).
    """

    joint_count: int
    dims_per_joint: int
    joint_names: list[str]
    edges: list[tuple[int, int]] = field(default_factory=list)
    bone_lengths: list[float] | None = None

    def __post_init__(self):
        validate_skeleton(self)

    @property
    def pose_dim(self) -> int:
        """Flattened pose dimension K = J * dims_per_joint."""
        return self.joint_count * self.dims_per_joint

    def parent_of(self) -> list[int]:
        """Parent index per joint (-1 for the root)."""
        parents = [-1] * self.joint_count
        for parent, child in self.edges:
            parents[child] = parent
        return parents


def validate_skeleton(skeleton: SkeletonSpec) -> None:
    """Check tree structure and field consistency; raise SkeletonError if bad."""
    J = skeleton.joint_count
    if J < 1:
        raise SkeletonError(f"joint_count must be positive, got {J}")
    if skeleton.dims_per_joint < 1:
        raise SkeletonError(
            f"dims_per_joint must be positive, got {skeleton.dims_per_joint}"
        )
    if len(skeleton.joint_names) != J:
        raise SkeletonError(
            f"expected {J} joint names, got {len(skeleton.joint_names)}"
        )
    if len(skeleton.edges) != J - 1:
        raise SkeletonError(
            f"a tree over {J} joints needs {J - 1} edges, got {len(skeleton.edges)}"
        )
    seen_children = set()
    for parent, child in skeleton.edges:
        for idx in (parent, child):
            if not 0 <= idx < J:
                raise SkeletonError(f"edge ({parent}, {child}) references joint {idx}")
        if child in seen_children:
            raise SkeletonError(f"joint {child} has two parents")
        if child == 0:
            raise SkeletonError("root joint 0 cannot be a child")
        seen_children.add(child)
    # Connectivity: every non-root joint must reach the root through parents.
    parents = {child: parent for parent, child in skeleton.edges}
    for j in range(1, J):
        hops = 0
        node = j
        while node != 0:
            if node not in parents or hops > J:
                raise SkeletonError(f"joint {j} is not connected to the root")
            node = parents[node]
            hops += 1
    if skeleton.bone_lengths is not None:
        if len(skeleton.bone_lengths) != len(skeleton.edges):
            raise SkeletonError(
                f"expected {len(skeleton.edges)} bone lengths, "
                f"got {len(skeleton.bone_lengths)}"
            )
        if any(b <= 0 for b in skeleton.bone_lengths):
            raise SkeletonError("bone lengths must be positive")


def default_skeleton() -> SkeletonSpec:
    """Desk-scale default: a root with two 2-link chains (5 joints, K=15)."""
    return SkeletonSpec(
        joint_count=5,
        dims_per_joint=3,
        joint_names=["root", "a1", "a2", "b1", "b2"],
        edges=[(0, 1), (1, 2), (0, 3), (3, 4)],
        bone_lengths=[1.0, 0.8, 1.0, 0.8],
    )


def chain_skeleton(joint_count: int, dims_per_joint: int = 3) -> SkeletonSpec:
    """Generic straight-chain skeleton for data whose topology is unknown."""
    return SkeletonSpec(
        joint_count=joint_count,
        dims_per_joint=dims_per_joint,
        joint_names=[f"j{i}" for i in range(joint_count)],
        edges=[(i, i + 1) for i in range(joint_count - 1)],
        bone_lengths=None,
    )


def skeleton_for_pose_dim(pose_dim: int, dims_per_joint: int = 3) -> SkeletonSpec:
    """Build a placeholder skeleton matching a flattened pose width."""
    if pose_dim % dims_per_joint != 0:
        raise SkeletonError(
            f"pose dimension {pose_dim} is not a multiple of {dims_per_joint}"
        )
    return chain_skeleton(pose_dim // dims_per_joint, dims_per_joint)
