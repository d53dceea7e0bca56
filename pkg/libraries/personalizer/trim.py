"""Three-pass personalization of a workflow for one client."""

from typing import Optional

from robot.api import logger

from libraries.tools import ToolSet, filter_tools
from libraries.workflow import TERMINAL_TOOL, Workflow, validate_workflow

from .cleanup import pass3_cleanup
from .client_data import ClientData
from .fidelity import pass2_fidelity
from .prune import Decider, Pruner
from .result import TrimResult, TrimStats


def trim(
    w: Workflow,
    c: ClientData,
    toolset: Optional[ToolSet] = None,
    terminal_tool: str = TERMINAL_TOOL,
    max_depth: int = 8,
    decider: Optional[Decider] = None,
) -> TrimResult:
    """
    Personalize a workflow: prune, restore fidelity, clean up.

    Args:
        w: Full workflow of the intent
        c: Client record built from the info tools
        toolset: Intent tool set to filter down to the referenced tools
        terminal_tool: Case-closing tool name
        max_depth: Maximum branch depth of the result
        decider: Optional replacement for the static branch decision

    Returns:
        TrimResult with the trimmed workflow, its tools and the edit log

    Raises:
        MissingAttribute, FidelityViolation, WorkflowValidationError
    """
    pruner = Pruner(c, decider)
    pruned = pruner.run(w)
    restored, fidelity_edits = pass2_fidelity(pruned, w, client=c)
    cleaned, cleanup_edits = pass3_cleanup(restored, terminal_tool, customer_id=c.customer_id)

    validate_workflow(
        cleaned, tool_names=toolset.names if toolset is not None else None, max_depth=max_depth
    )
    tools = cleaned.tool_names()
    filtered = filter_tools(toolset, tools) if toolset is not None else None
    stats = TrimStats(
        step_visits=pruner.visits, tool_visits=len(toolset) if toolset is not None else 0
    )
    edits = tuple(pruner.edits) + tuple(fidelity_edits) + tuple(cleanup_edits)
    logger.debug(
        f"Trimmed {w.id} for customer {c.customer_id}: {w.step_count} -> "
        f"{cleaned.step_count} steps, {len(tools)} tools, {len(edits)} edits"
    )
    return TrimResult(cleaned, tools, edits, filtered, stats)
