"""
Robot Framework library for personalizing workflows and auditing the result.
"""

import json
from typing import Any, Dict, Optional

from robot.api import logger
from robot.api.deco import keyword

from libraries.tools import ToolSet, load_toolset
from libraries.workflow import Workflow, enumerate_paths, serialize_workflow, token_count

from .audit import audit
from .client_data import ClientData
from .oracle import call_paths, oracle_trim
from .result import TrimResult
from .trim import trim


class PersonalizerLibrary:
    """
    Robot Framework library around the three-pass trim.

    The last trim result is kept so assertion keywords can refer to it.
    """

    ROBOT_LIBRARY_SCOPE = "GLOBAL"
    ROBOT_LIBRARY_VERSION = "1.0.0"

    def __init__(self):
        self.result: Optional[TrimResult] = None
        self.original: Optional[Workflow] = None
        self.client: Optional[ClientData] = None
        self.toolset: Optional[ToolSet] = None

    def _result(self) -> TrimResult:
        if self.result is None:
            raise AssertionError("No workflow has been trimmed yet")
        return self.result

    @keyword("Load Tool Manifest")
    def load_tool_manifest(self, path: str) -> ToolSet:
        """
        Example:
            | ${toolset}= | Load Tool Manifest | fixtures/tools/update_address.json |
        """
        return load_toolset(path)

    @keyword("Build Client Data")
    def build_client_data(self, record: Any, toolset: ToolSet, *nullable: str) -> ClientData:
        """
        Build a client record from a customer record and the intent's info tools.

        Args:
            record: Customer record (dict or JSON string)
            toolset: Intent tool set
            nullable: Attribute paths that read as null when absent

        Example:
            | ${client}= | Build Client Data | ${profile_record} | ${toolset} |
        """
        if isinstance(record, str):
            record = json.loads(record)
        self.client = ClientData.from_record(record, toolset, nullable)
        return self.client

    @keyword("Trim Workflow")
    def trim_workflow(
        self, workflow: Workflow, client: ClientData, toolset: Optional[ToolSet] = None
    ) -> TrimResult:
        """
        Personalize a workflow for a client and remember the result.

        Example:
            | ${result}= | Trim Workflow | ${wf} | ${client} | ${toolset} |
        """
        self.original = workflow
        self.client = client
        self.toolset = toolset
        self.result = trim(workflow, client, toolset)
        logger.info(
            f"Trimmed {workflow.id}: tokens {token_count(workflow)} -> "
            f"{token_count(self.result.workflow)}, tools {sorted(self.result.tools)}"
        )
        return self.result

    @keyword("Get Trimmed Workflow Text")
    def get_trimmed_workflow_text(self) -> str:
        return serialize_workflow(self._result().workflow)

    @keyword("Trimmed Tools Should Be")
    def trimmed_tools_should_be(self, *expected: str):
        """
        Example:
            | Trimmed Tools Should Be | validate_address | update_address | complete_case |
        """
        actual = self._result().tools
        if set(expected) != set(actual):
            raise AssertionError(f"Expected tools {sorted(expected)}, got {sorted(actual)}")

    @keyword("Trimmed Workflow Should Not Call Tool")
    def trimmed_workflow_should_not_call_tool(self, tool: str):
        if tool in self._result().workflow.tool_names():
            raise AssertionError(f"Trimmed workflow still calls {tool}")

    @keyword("Trim Should Match Oracle")
    def trim_should_match_oracle(self):
        """Compare the call paths of the last trim with the brute-force reference."""
        expected = oracle_trim(self.original, self.client).paths
        actual = call_paths(self._result().workflow, self.client)
        if actual != expected:
            missing = [" -> ".join(tool for tool, _ in path) for path in sorted(expected - actual)]
            extra = [" -> ".join(tool for tool, _ in path) for path in sorted(actual - expected)]
            raise AssertionError(f"Trim differs from the reference: missing {missing}, extra {extra}")

    @keyword("Trim Should Shrink Workflow")
    def trim_should_shrink_workflow(self):
        """Token count and path count of the trim never exceed the original's."""
        trimmed = self._result().workflow
        if token_count(trimmed) > token_count(self.original):
            raise AssertionError("Trimmed workflow has more tokens than the original")
        if enumerate_paths(trimmed).count > enumerate_paths(self.original).count:
            raise AssertionError("Trimmed workflow has more paths than the original")

    @keyword("Audit Last Trim")
    def audit_last_trim(self) -> Dict[str, Any]:
        """
        Score the last trim with the relevance/completeness rubric.

        Returns:
            Dictionary with relevance, completeness and findings

        Example:
            | ${scores}= | Audit Last Trim |
            | Should Be Equal As Integers | ${scores}[relevance] | 5 |
        """
        scores = audit(self._result().workflow, self.original, self.client)
        for finding in scores.findings:
            logger.info(finding)
        return scores._asdict()
