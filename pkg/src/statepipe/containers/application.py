"""Main application container for Statepipe."""

from dependency_injector import containers, providers

from statepipe.containers.api_clients import ApiClientContainer
from statepipe.containers.core import CoreContainer
from statepipe.containers.pipeline import PipelineContainer


class ApplicationContainer(containers.DeclarativeContainer):
    """Main application container that orchestrates all service containers."""

    config = providers.Configuration()

    core_container = providers.Container(
        CoreContainer,
        config=config.pipeline,
    )

    api_client_container = providers.Container(
        ApiClientContainer,
        config=config,
        hash_generator=core_container.hash_generator,
    )

    pipeline_container = providers.Container(
        PipelineContainer,
        config=config,
        hash_generator=core_container.hash_generator,
        manifest_store=core_container.manifest_store,
        labeler_client=api_client_container.labeler_client,
        scorer_factory=api_client_container.scorer_factory.provider,
    )
