"""Pipeline services container for Statepipe."""

from dependency_injector import containers, providers

from statepipe.containers.config import StatepipeConfig
from statepipe.core.pipeline import PipelineRunner
from statepipe.reports import ReportGenerator


class PipelineContainer(containers.DeclarativeContainer):
    """Container for the stage runner and report rendering."""

    config = providers.Configuration()

    # External dependencies
    hash_generator = providers.Dependency()
    manifest_store = providers.Dependency()
    labeler_client = providers.Dependency()
    scorer_factory = providers.Dependency()

    report_generator: providers.Singleton[ReportGenerator] = providers.Singleton(ReportGenerator)

    runner: providers.Factory[PipelineRunner] = providers.Factory(
        PipelineRunner,
        config=providers.Callable(StatepipeConfig.model_validate, config),
        client=labeler_client,
        scorer_factory=scorer_factory,
        manifest_store=manifest_store,
        hash_generator=hash_generator,
        report_generator=report_generator,
    )
