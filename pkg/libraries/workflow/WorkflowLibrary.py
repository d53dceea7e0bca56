"""
Robot Framework library for loading, round-tripping and analysing workflows.
"""

from pathlib import Path
from typing import Optional

from robot.api import logger
from robot.api.deco import keyword

from .analysis import DEFAULT_PATH_CAP, decision_points, enumerate_paths, token_count
from .dsl import parse_workflow, serialize_workflow
from .errors import WorkflowError
from .ir import Workflow


class WorkflowLibrary:
    """
    Robot Framework library for the workflow DSL.

    Keeps the most recently loaded workflow as the current one so that
    assertion keywords can be chained without passing it around.
    """

    ROBOT_LIBRARY_SCOPE = "GLOBAL"
    ROBOT_LIBRARY_VERSION = "1.0.0"

    def __init__(self):
        self.workflow: Optional[Workflow] = None

    def _current(self, workflow: Optional[Workflow] = None) -> Workflow:
        workflow = workflow or self.workflow
        if workflow is None:
            raise AssertionError("No workflow loaded")
        return workflow

    @keyword("Load Workflow")
    def load_workflow(self, path: str, manifest: Optional[str] = None) -> Workflow:
        """
        Parse a ``.wf`` file and make it the current workflow.

        Args:
            path: Path to the DSL source
            manifest: Optional tool manifest every called tool must resolve against

        Returns:
            Parsed Workflow

        Example:
            | ${wf}= | Load Workflow | fixtures/workflows/update_address.wf |
        """
        from libraries.tools import load_toolset

        tool_names = load_toolset(manifest).names if manifest else None
        text = Path(path).read_text(encoding="utf-8")
        self.workflow = parse_workflow(text, tool_names=tool_names)
        logger.info(f"Loaded workflow {self.workflow.id} with {len(self.workflow.steps)} steps")
        return self.workflow

    @keyword("Parse Workflow Text")
    def parse_workflow_text(self, text: str) -> Workflow:
        """
        Parse DSL source given inline.

        Example:
            | ${wf}= | Parse Workflow Text | ${source} |
        """
        self.workflow = parse_workflow(text)
        return self.workflow

    @keyword("Workflow Should Fail To Parse")
    def workflow_should_fail_to_parse(self, text: str, expected: str = "") -> str:
        """
        Assert that parsing fails, optionally with a message containing ``expected``.

        Returns:
            The error message

        Example:
            | Workflow Should Fail To Parse | ${source} | goto to undefined step |
        """
        try:
            parse_workflow(text)
        except WorkflowError as e:
            if expected and expected not in str(e):
                raise AssertionError(f"Expected error containing {expected!r}, got: {e}")
            logger.info(f"Parse failed as expected: {e}")
            return str(e)
        raise AssertionError("Workflow parsed without error")

    @keyword("Serialize Workflow")
    def serialize(self, workflow: Optional[Workflow] = None) -> str:
        """Return the canonical DSL text of the given or current workflow."""
        return serialize_workflow(self._current(workflow))

    @keyword("Workflow Should Round Trip")
    def workflow_should_round_trip(self, workflow: Optional[Workflow] = None):
        """
        Serialize and re-parse, then compare structurally.

        Example:
            | Workflow Should Round Trip |
        """
        workflow = self._current(workflow)
        text = serialize_workflow(workflow)
        again = parse_workflow(text)
        if again != workflow:
            raise AssertionError(f"Workflow {workflow.id} changed after a round trip")
        if serialize_workflow(again) != text:
            raise AssertionError(f"Serialization of {workflow.id} is not byte-stable")

    @keyword("Get Token Count")
    def get_token_count(self, workflow: Optional[Workflow] = None) -> int:
        return token_count(self._current(workflow))

    @keyword("Get Path Count")
    def get_path_count(self, workflow: Optional[Workflow] = None, cap: int = DEFAULT_PATH_CAP) -> int:
        """
        Number of distinct tool sequences through the workflow.

        Example:
            | ${paths}= | Get Path Count | cap=1000 |
        """
        paths = enumerate_paths(self._current(workflow), int(cap))
        if paths.truncated:
            logger.warn(f"Path enumeration stopped at the cap of {cap}")
        return paths.count

    @keyword("Get Decision Points")
    def get_decision_points(self, workflow: Optional[Workflow] = None) -> int:
        return decision_points(self._current(workflow))

    @keyword("Top Level Step Count Should Be")
    def top_level_step_count_should_be(self, expected: int, workflow: Optional[Workflow] = None):
        """
        Example:
            | Top Level Step Count Should Be | 6 |
        """
        actual = len(self._current(workflow).steps)
        if actual != int(expected):
            raise AssertionError(f"Expected {expected} top-level steps, found {actual}")

    @keyword("Workflow Should Call Tool")
    def workflow_should_call_tool(self, tool: str, workflow: Optional[Workflow] = None):
        if tool not in self._current(workflow).tool_names():
            raise AssertionError(f"Workflow does not call {tool}")

    @keyword("Workflow Should Not Call Tool")
    def workflow_should_not_call_tool(self, tool: str, workflow: Optional[Workflow] = None):
        if tool in self._current(workflow).tool_names():
            raise AssertionError(f"Workflow still calls {tool}")
