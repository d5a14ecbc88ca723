export { Prng, deriveSeed } from "./prng.js";
export {
  EmbeddingTable,
  readTable,
  tablePaths,
  validateTable,
  writeTable,
} from "./interchange.js";
export {
  RawImage,
  readImageManifest,
  readRawImage,
  toNhwc,
  writeRawImage,
} from "./rawimage.js";
export {
  BackboneSpec,
  Family,
  Param,
  Pooling,
  Weights,
  buildRandomWeights,
  familyDepth,
  forward,
  stemParamName,
  validateStages,
  weightsFromJson,
  weightsToJson,
} from "./backbones.js";
export { AdaptScheme, ChannelAdaptation, adaptWeights, expandStemKernel } from "./adapt.js";
export { ExtractResult, extractEmbeddings, modelLabel, resolveWeights } from "./extract.js";
