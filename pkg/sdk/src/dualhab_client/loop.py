"""Agent episode loop over a protocol client."""

from __future__ import annotations

from dataclasses import dataclass, field

DEFAULT_MAX_STEPS = 50


@dataclass
class EpisodeRecord:
    task_id: str
    seed: int
    success: bool
    steps: int
    commands: int
    final_status: str
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"taskId": self.task_id, "seed": self.seed,
               "success": self.success, "steps": self.steps,
               "commands": self.commands, "finalStatus": self.final_status}
        if self.trace:
            out["trace"] = self.trace
        return out


def run_agent(client, policy, task, *, max_steps=DEFAULT_MAX_STEPS,
              robot="x1", difficulty="easy", seed=0,
              solve_kinematics=True, keep_trace=False) -> EpisodeRecord:
    """Mirror of the engine CLI's episode loop, driven over the wire.

    ``task`` is a task dict from ``client.list_tasks()`` (or just its id
    string). The loop stops on task success, an exhausted step budget, an
    exhausted command budget, or a policy that yields no further command.
    """
    if isinstance(task, str):
        task = next(t for t in client.list_tasks() if t["id"] == task)
    response = client.reset(task_id=task["id"], robot=robot,
                            difficulty=difficulty, seed=seed,
                            solve_kinematics=solve_kinematics)
    feedback = response.feedback
    status = response.task_status or "none"
    steps = response.step_count
    commands = 0
    trace = []
    command_budget = 4 * max_steps
    while steps < max_steps and commands < command_budget:
        if status == "success":
            break
        command = policy.act(task, feedback)
        if command is None:
            break
        result = client.step(command)
        feedback = result.feedback or client.load_state().feedback
        status = result.task_status or status
        steps = result.step_count
        commands += 1
        if keep_trace:
            trace.append({"command": command, "outcome": result.outcome,
                          "success": result.success, "stepCount": steps})
    return EpisodeRecord(task_id=task["id"], seed=seed,
                         success=status == "success", steps=steps,
                         commands=commands, final_status=status, trace=trace)
