"""API client services container for Statepipe."""

from dependency_injector import containers, providers

from statepipe.api_clients.chat import LabelerClient
from statepipe.api_clients.scorers import ScorerSet, build_scorers
from statepipe.containers.config import LlmClientConfig, VlmScorerConfig


class ApiClientContainer(containers.DeclarativeContainer):
    """Container for the chat-completion client and the frame scorers."""

    config = providers.Configuration()

    # External dependencies
    hash_generator = providers.Dependency()

    # Tests override this with an httpx.MockTransport
    transport = providers.Object(None)

    labeler_client: providers.Singleton[LabelerClient] = providers.Singleton(
        LabelerClient,
        config=providers.Callable(LlmClientConfig.model_validate, config.llm),
        transport=transport,
        hash_generator=hash_generator,
    )

    # Scorers are built only when alignment runs
    scorer_factory: providers.Factory[ScorerSet] = providers.Factory(
        build_scorers,
        config=providers.Callable(VlmScorerConfig.model_validate, config.vlm),
        transport=transport,
    )
